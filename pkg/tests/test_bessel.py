import numpy as np
import pytest
from scipy import integrate

from agingframe.bessel import complex_bessel_j0


def j0_quad(z):
    """Defining-integral oracle: (1/2pi) int exp(-j z sin t) dt."""
    def f(t):
        return np.exp(-1j * z * np.sin(t))
    re, _ = integrate.quad(lambda t: f(t).real, -np.pi, np.pi, limit=400)
    im, _ = integrate.quad(lambda t: f(t).imag, -np.pi, np.pi, limit=400)
    return (re + 1j * im) / (2.0 * np.pi)


def i0_series(x, terms=60):
    """Modified-Bessel series oracle for the J0(jx) = I0(x) identity."""
    total = 0.0
    term = 1.0
    for k in range(terms):
        if k > 0:
            term *= (x / 2.0) ** 2 / k ** 2
        total += term
    return total


def test_zero_argument():
    assert complex_bessel_j0(0.0) == pytest.approx(1.0)


def test_first_real_zero():
    z = 2.4048255577
    assert abs(complex_bessel_j0(z)) < 1e-8
    assert complex_bessel_j0(z) == pytest.approx(j0_quad(z), abs=1e-10)


def test_imaginary_axis_matches_series():
    assert complex_bessel_j0(1j * 1.0) == pytest.approx(i0_series(1.0),
                                                        rel=1e-12)
    assert complex_bessel_j0(1j * 3.5) == pytest.approx(i0_series(3.5),
                                                        rel=1e-12)


@pytest.mark.parametrize("z", [0.5, 5.0, 12.5, 30.0, 50.0,
                               2.0 + 1.0j, -7.0 + 3.0j, 10.0 - 4.0j])
def test_accuracy_against_quadrature(z):
    assert complex_bessel_j0(z) == pytest.approx(j0_quad(z), abs=1e-10)


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        complex_bessel_j0(np.inf)
    with pytest.raises(ValueError):
        complex_bessel_j0(complex(np.nan, 0.0))
