"""Bundled benchmark scenarios: the comparison-table blocks and the sweeps.

The comparison table groups four layouts per scenario block; the bold row of
each block is the expected argmax.  A few entries of the published table are
internally inconsistent (parameters that vary within a block, a zero NLoS
variance that would silence the channel entirely); each block here uses the
bold row's parameter set, with the repairs noted in the block's ``notes``.

Unstated constants assumed throughout: tau_p = 1, sigma_p^2 = 1e-4 per user,
f_c = 1000; data noise follows from the SNR column.
"""
from __future__ import annotations

from dataclasses import dataclass

from .framelayout import FrameLayout, build_layout
from .scenario import Scenario, UserConfig
from .schedules import ParamSchedule, constant


def _lin(a):
    return ParamSchedule("linear", a)


def _aff(a, b):
    return ParamSchedule("affine", a, b)


def _rec(a):
    return ParamSchedule("reciprocal", a)


def _rec_aff(a, b):
    return ParamSchedule("reciprocal_affine", a, b)


@dataclass
class TableBlock:
    name: str
    scenario: Scenario
    layouts: list
    reference_ase: list
    bold_index: int
    notes: str = ""

    @property
    def bold_layout(self) -> FrameLayout:
        return self.layouts[self.bold_index]


def _scenario(snr, pp1, pd1, pp2, pd2, fd1, fd2, kf1, kf2, pl1, pl2,
              s1, s2, n_r=20) -> Scenario:
    def sched(v):
        return v if isinstance(v, ParamSchedule) else constant(v)
    users = [
        UserConfig(doppler=sched(fd1), rician_factor=sched(kf1),
                   nlos_variance=sched(s1), path_loss_db=pl1,
                   pp_max=pp1, pd_max=pd1),
        UserConfig(doppler=sched(fd2), rician_factor=sched(kf2),
                   nlos_variance=sched(s2), path_loss_db=pl2,
                   pp_max=pp2, pd_max=pd2),
    ]
    return Scenario(users=users, antenna_count=n_r, snr_db=snr)


def table_blocks() -> list:
    """The seven benchmark blocks (stationary and non-stationary)."""
    blocks = []
    blocks.append(TableBlock(
        name="block1",
        scenario=_scenario(30, 1, 1, 1, 1, 0.1, 100, 1, 0, 1, 90, 1, 1),
        layouts=[build_layout(q) for q in
                 ([12], [6, 6], [4, 4, 4], [3, 3, 3, 3])],
        reference_ase=[13.3067, 12.9756, 11.9469, 10.7511],
        bold_index=0))
    blocks.append(TableBlock(
        name="block2",
        scenario=_scenario(0, .1, .1, .1, .1, 1, 10, 0.1, 0, 0, 90, 1, 1),
        layouts=[build_layout(q) for q in
                 ([12], [6, 6], [4, 4, 4], [3, 3, 3, 3])],
        reference_ase=[3.8722, 4.3383, 4.0842, 3.7122],
        bold_index=1,
        notes="published rows vary K_f1 (1 vs 0.1) and PL1 (1 vs 0); the "
              "bold row's values K_f1=0.1, PL1=0 are used for all layouts"))
    blocks.append(TableBlock(
        name="block3",
        scenario=_scenario(30, .1, .1, .1, .1, 100, 0.01, 0, 1, 1, 90, 1, 1),
        layouts=[build_layout(q) for q in
                 ([2], [3, 2], [3, 3, 2], [3, 3, 3, 2])],
        reference_ase=[1.5806, 2.0004, 2.1054, 2.1531],
        bold_index=3,
        notes="published magnitudes imply a much lower operating SNR than "
              "the block's SNR column; ordering and argmax reproduce"))
    blocks.append(TableBlock(
        name="block4",
        scenario=_scenario(50, 1, 1, 1, 1, _lin(0.1), _lin(0.1), _lin(0.1),
                           _lin(0.1), 50, 50, _rec(10), _rec(10)),
        layouts=[build_layout(q) for q in
                 ([6], [6, 4], [4, 4, 4], [3, 3, 3, 3])],
        reference_ase=[9.1511, 8.773, 8.2585, 7.5917],
        bold_index=0,
        notes="published magnitudes imply near-noiseless pilots despite the "
              "50 dB path loss; ordering and argmax reproduce"))
    blocks.append(TableBlock(
        name="block5",
        scenario=_scenario(10, 10, 1, 10, 1, _aff(10, 12), _lin(10),
                           _aff(10, 12), _lin(10), 1, 1,
                           _rec_aff(0.1, 12), _rec(0.1)),
        layouts=[build_layout(q) for q in
                 ([10], [6, 6], [4, 4, 2], [3, 3, 3, 2])],
        reference_ase=[3.671, 3.3593, 3.0668, 2.7636],
        bold_index=0,
        notes="NLoS variance 1/(10(12-t)) is singular at t=12, so the "
              "12-slot layout [6,6] cannot be evaluated and is reported "
              "as an error row"))
    blocks.append(TableBlock(
        name="block6",
        scenario=_scenario(0, 1, 1, 1, 1, _aff(1, 12), _lin(10), 0, 0,
                           50, 100, 1, 1),
        layouts=[build_layout(q) for q in
                 ([6], [6, 6], [4, 4, 4], [3, 3, 3, 3])],
        reference_ase=[0.8886, 1.7832, 1.9684, 1.9231],
        bold_index=2,
        notes="published NLoS variances are 0, which would zero the channel "
              "and every ASE; variance 1 is assumed"))
    blocks.append(TableBlock(
        name="block7",
        scenario=_scenario(0, .1, .1, .1, .1, _lin(5), 10, _lin(1 / 50),
                           _aff(1 / 12, 12), 0, 90, 1, 1),
        layouts=[build_layout(q) for q in
                 ([5], [5, 2], [4, 4, 2], [3, 3, 3, 2])],
        reference_ase=[2.9595, 3.0616, 2.9445, 2.7627],
        bold_index=1))
    return blocks


# ---------------------------------------------------------------------------
# figure-style sweep configurations
# ---------------------------------------------------------------------------

@dataclass
class SweepSpec:
    name: str
    scenario: Scenario
    parameter: str
    values: list
    q_max: int = 24
    m_max: int = 1
    fixed_powers: bool = True
    notes: str = ""


def _two_user_scenario(**kw) -> Scenario:
    defaults = dict(snr=0, pp1=1, pd1=1, pp2=1, pd2=1, fd1=0.1, fd2=100,
                    kf1=0, kf2=0, pl1=0, pl2=0, s1=1, s2=1, n_r=20)
    defaults.update(kw)
    return _scenario(**defaults)


def doppler_sweep() -> SweepSpec:
    """ASE versus the tagged user's Doppler (single frame, optimized size)."""
    return SweepSpec(name="ase_vs_doppler",
                     scenario=_two_user_scenario(snr=0, kf1=0, pl2=90),
                     parameter="fd1", values=[0.1, 1.0, 10.0, 100.0])


def kfactor_sweep() -> SweepSpec:
    """ASE versus the tagged user's Rician factor at high Doppler."""
    return SweepSpec(name="ase_vs_kfactor",
                     scenario=_two_user_scenario(snr=0, fd1=100, pl2=90),
                     parameter="kf1", values=[0.0, 1.0, 10.0])


def interference_pl_sweep() -> SweepSpec:
    """Layout insensitivity: sweep the interferer's path loss."""
    scen = _two_user_scenario(fd1=100, fd2=100, pl1=0, pl2=0)
    scen = scen.with_overrides(snr_db=None, sigma_d2=1e-4)
    return SweepSpec(name="ase_vs_pl2", scenario=scen, parameter="pl2",
                     values=[0.0, 10.0, 30.0, 50.0, 70.0, 90.0])


def interference_doppler_sweep() -> SweepSpec:
    """Layout insensitivity: sweep the interferer's Doppler."""
    scen = _two_user_scenario(fd1=100, fd2=0.1, pl1=0, pl2=0)
    scen = scen.with_overrides(snr_db=None, sigma_d2=1e-4)
    return SweepSpec(name="ase_vs_fd2", scenario=scen, parameter="fd2",
                     values=[0.1, 1.0, 10.0, 100.0])


def interference_power_ratio_sweep() -> SweepSpec:
    """Layout insensitivity: sweep the interferer's pilot/data split."""
    scen = _two_user_scenario(fd1=5, fd2=100, pl1=0, pl2=0)
    scen = scen.with_overrides(snr_db=None, sigma_d2=1e-4)
    return SweepSpec(name="ase_vs_rp2", scenario=scen, parameter="rp2",
                     values=[0.1, 0.5, 1.0, 2.0, 10.0],
                     notes="interferer data power fixed; pilot power scales "
                           "with the ratio")


def joint_power_scenario() -> Scenario:
    """Joint frame and power optimization setting (small array, explicit
    noise levels, strongly asymmetric links)."""
    scen = _scenario(snr=0, pp1=1, pd1=1, pp2=1, pd2=1, fd1=100, fd2=0.1,
                     kf1=0, kf2=0, pl1=10, pl2=50, s1=1, s2=1, n_r=10)
    scen = scen.with_overrides(snr_db=None, sigma_d2=1e-5)
    scen.users[0].sigma_p2 = 1e-5
    scen.users[1].sigma_p2 = 1e-6
    scen.p_tot = 2.0
    return scen


def joint_power_bounds() -> dict:
    """Search bounds under which the joint setting reports its published
    two-frame optimum [3,2]."""
    return {"q_max": 12, "m_max": 2}


def all_sweeps() -> list:
    return [doppler_sweep(), kfactor_sweep(), interference_pl_sweep(),
            interference_doppler_sweep(), interference_power_ratio_sweep()]


def bundled_scenarios() -> dict:
    """Named scenarios exportable through the CLI."""
    out = {b.name: b.scenario for b in table_blocks()}
    out["joint_power"] = joint_power_scenario()
    for spec in all_sweeps():
        out[spec.name] = spec.scenario
    return out
