"""Deadline-driven timing and per-patient rates for one Pat_max scenario."""

from __future__ import annotations

from dataclasses import dataclass


class InfeasibleDeadline(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioParams:
    pat_max: int
    t_total: float = 240.0
    unit_proc_time: float = 0.0963
    analysis_factor: float = 0.10
    ecg_bits: float = 1_920_000.0
    processed_bits: float = 126_720.0
    n_patients: int = 200
    # replaces unit_proc_time * (1 + analysis_factor) when set
    unit_pa_override: float | None = None

    @property
    def unit_pa_time(self) -> float:
        if self.unit_pa_override is not None:
            return self.unit_pa_override
        return self.unit_proc_time * (1.0 + self.analysis_factor)

    def validate(self) -> None:
        if self.pat_max < 1:
            raise ValueError(f"pat_max must be >= 1, got {self.pat_max}")
        if self.t_total <= 0:
            raise ValueError("t_total must be positive")
        if self.unit_pa_time <= 0 or self.ecg_bits <= 0 or self.processed_bits < 0:
            raise ValueError("per-patient time and ECG size must be positive")
        if self.n_patients < 0:
            raise ValueError("n_patients must be non-negative")


@dataclass(frozen=True)
class TimingPlan:
    t_pa: float
    t_t: float
    t_cloud: float | None = None


@dataclass(frozen=True)
class RatePlan:
    r_ps: float
    r_cloud: float


@dataclass(frozen=True)
class Scenario:
    params: ScenarioParams
    timing: TimingPlan
    rates: RatePlan

    @property
    def pat_max(self) -> int:
        return self.params.pat_max


def derive_timing(params: ScenarioParams) -> TimingPlan:
    params.validate()
    t_pa = params.pat_max * params.unit_pa_time
    if t_pa >= params.t_total:
        raise InfeasibleDeadline(
            f"processing {t_pa:.6g} s for {params.pat_max} patients leaves no "
            f"transmission time within {params.t_total:g} s")
    return TimingPlan(t_pa=t_pa, t_t=params.t_total - t_pa)


def derive_rates(params: ScenarioParams, timing: TimingPlan,
                 hc_uplink_share: float) -> tuple[RatePlan, TimingPlan]:
    """Per-patient rates; also returns ``timing`` completed with t_cloud."""
    if hc_uplink_share <= 0:
        raise ValueError("hc_uplink_share must be positive")
    if timing.t_t <= 0:
        raise InfeasibleDeadline("t_t must be positive")
    r_ps = params.ecg_bits / timing.t_t
    r_cloud = hc_uplink_share / params.pat_max
    t_cloud = params.processed_bits / r_cloud
    return RatePlan(r_ps, r_cloud), TimingPlan(timing.t_pa, timing.t_t, t_cloud)


def make_scenario(params: ScenarioParams, hc_uplink_share: float) -> Scenario:
    timing = derive_timing(params)
    rates, timing = derive_rates(params, timing, hc_uplink_share)
    return Scenario(params, timing, rates)


# printed precision of each timing-table row, in the units the table uses
TIMING_COLUMNS = (
    ("t_pa_s", "Maximum processing and analysis time (s)", 1),
    ("t_t_s", "Transmission time to the processing server (s)", 1),
    ("r_ps_kbps", "Data rate to transmit ECG signal to processing server (kbps)", 3),
    ("r_cloud_kbps", "Data rate to transmit analysed ECG signal to cloud storage (kbps)", 3),
    ("t_cloud_s", "Transmission time to the cloud storage (s)", 2),
)


@dataclass(frozen=True)
class ScenarioRow:
    label: str
    pat_max: int
    t_pa_s: float
    t_t_s: float
    r_ps_kbps: float
    r_cloud_kbps: float
    t_cloud_s: float

    def rounded(self) -> dict[str, float]:
        return {key: round(getattr(self, key), digits) for key, _, digits in TIMING_COLUMNS}


def scenario_table(pat_max_list, base: ScenarioParams | None = None,
                   hc_uplink_share: float = 234_375.0) -> list[ScenarioRow]:
    from dataclasses import replace

    base = base or ScenarioParams(pat_max=1)
    rows = []
    for i, pm in enumerate(pat_max_list, start=1):
        sc = make_scenario(replace(base, pat_max=pm), hc_uplink_share)
        rows.append(ScenarioRow(
            label=f"S{i}", pat_max=pm,
            t_pa_s=sc.timing.t_pa, t_t_s=sc.timing.t_t,
            r_ps_kbps=sc.rates.r_ps / 1e3, r_cloud_kbps=sc.rates.r_cloud / 1e3,
            t_cloud_s=sc.timing.t_cloud,
        ))
    return rows
