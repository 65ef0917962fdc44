"""Parameter sweeps over the solver and strong-field model.

Every sweep point owns its propagation; points run concurrently in a
bounded thread pool (the stepping kernels release the GIL) and results are
collected in parameter order, so outputs are bit-identical for any worker
count. ScanResult metadata snapshots all inputs for exact re-runs.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__
from .config import JunctionConfig, LaserConfig
from .grid import AbsorberSpec, GridSpec
from .laser import field_crest_time
from .results import ScanResult
from .solver import (CurrentRecord, initial_state, propagate,
                     transferred_charge)
from . import strongfield


class BurstError(ValueError):
    """No burst stands out of the noise floor."""


@dataclass(frozen=True)
class BurstMetrics:
    """Main current burst at a probe: duration and timing in attoseconds."""

    fwhm: float          # as
    peak_time: float     # as, relative to the field crest
    peak_height: float   # 1/fs

    def __post_init__(self):
        if self.fwhm <= 0:
            raise ValueError("fwhm must be positive")


def burst_metrics(record: CurrentRecord, *, crest_time: float,
                  cycle_fs: float) -> BurstMetrics:
    """FWHM and timing of the main burst (largest |j| within one optical
    cycle of the field crest), half-maximum crossings linearly interpolated.

    The noise floor is the RMS of the leading 5% of the record (pre-pulse);
    a peak below 10x that floor raises BurstError.
    """
    t = record.times
    j = record.current_density
    window = np.abs(t - crest_time) <= cycle_fs
    if not np.any(window):
        raise BurstError("record does not cover the field crest")
    floor = float(np.sqrt(np.mean(j[: max(2, j.size // 20)] ** 2)))
    aj = np.abs(j)
    iw = np.nonzero(window)[0]
    ipk = iw[np.argmax(aj[iw])]
    peak = aj[ipk]
    if peak < 10.0 * floor:
        raise BurstError(f"peak {peak:.3e} below 10x noise floor {floor:.3e}")
    half = 0.5 * peak
    lo = ipk
    while lo > 0 and aj[lo - 1] >= half:
        lo -= 1
    hi = ipk
    while hi < aj.size - 1 and aj[hi + 1] >= half:
        hi += 1
    if lo == 0 or hi == aj.size - 1:
        raise BurstError("half-maximum crossings fall outside the record")
    t_lo = np.interp(half, [aj[lo - 1], aj[lo]], [t[lo - 1], t[lo]])
    t_hi = np.interp(half, [aj[hi + 1], aj[hi]], [t[hi + 1], t[hi]])
    # parabolic refinement of the peak position
    denom = aj[ipk - 1] - 2.0 * aj[ipk] + aj[ipk + 1]
    tpk = t[ipk]
    if denom != 0.0:
        tpk += 0.5 * (aj[ipk - 1] - aj[ipk + 1]) / denom * (t[1] - t[0])
    return BurstMetrics(fwhm=float((t_hi - t_lo) * 1e3),
                        peak_time=float((tpk - crest_time) * 1e3),
                        peak_height=float(peak))


def default_time_span(laser: LaserConfig, *, burst_only: bool = False):
    """(t_start, t_end): start 5 FWHM before the pulse; end after the last
    current has cleared (2.5 FWHM) or just past the crest for burst runs."""
    tau = max(laser.duration_tau1, laser.duration_tau2)
    t0 = -5.0 * tau
    if burst_only:
        return t0, field_crest_time(laser) + 10.0
    return t0, 2.5 * tau


def _metadata(kind, cfg, laser, grid, absorber, **extra):
    md = {"kind": kind, "junction": asdict(cfg), "laser": asdict(laser),
          "grid": asdict(grid),
          "absorber": None if absorber is None else asdict(absorber),
          "code_version": __version__}
    md.update(extra)
    return md


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def directional_transfers(cfg, laser, grid, *, absorber=None, initial=None,
                          backend=None) -> tuple[float, float]:
    """(J+, J-): total tip->sample and sample->tip transferred charge.

    Both electrodes carry a Fermi sea; in the symmetric zero-bias junction
    the sample electron's transport is, by parity, the tip run under the
    negated waveform. Each run's transferred charge is averaged over the
    two junction walls (they agree up to the residual gap population).
    """
    t0, t1 = default_time_span(laser)
    out = []
    for las in (laser, laser.flipped()):
        res = propagate(cfg, las, grid, t0, t1, probes=(0.0, None),
                        absorber=absorber, initial=initial, backend=backend)
        out.append(0.5 * (transferred_charge(res.records[0])
                          + transferred_charge(res.records[1])))
    return out[0], out[1]


def net_delay_charge(cfg, laser, grid, *, absorber=None, initial=None,
                     backend=None) -> float:
    """Net laser-induced charge per pulse: tip->sample minus sample->tip.

    This is what the experiment's delay scans measure: symmetric around
    zero over a delay period and sign-inverting under waveform flip.
    Single-electrode quantities (the Fig-4c-style bursts) use one run.
    """
    j_fwd, j_bwd = directional_transfers(cfg, laser, grid, absorber=absorber,
                                         initial=initial, backend=backend)
    return j_fwd - j_bwd


def delay_scan_tdse(cfg: JunctionConfig, laser: LaserConfig, grid: GridSpec,
                    tau0_values, *, absorber: AbsorberSpec | None = None,
                    workers: int = 1, backend: str | None = None) -> ScanResult:
    """Net laser-induced charge versus two-colour base delay."""
    tau0_values = np.asarray(tau0_values, dtype=float)
    shared = initial_state(cfg, grid)

    def one(tau0):
        las = replace(laser, base_delay_tau0=float(tau0))
        return net_delay_charge(cfg, las, grid, absorber=absorber,
                                initial=shared, backend=backend)

    charges = _pmap(one, tau0_values, workers)
    return ScanResult("tau0", "fs", tau0_values, "net_charge", "electrons",
                      np.asarray(charges),
                      _metadata("delay", cfg, laser, grid, absorber,
                                tau0_values=tau0_values.tolist(),
                                workers_independent=True))


def modulation_amplitude(cfg, laser, grid, *, n_delays: int = 12,
                         absorber=None, workers: int = 1,
                         backend=None) -> float:
    """Half the peak-to-peak of a one-SH-period delay scan."""
    taus = np.arange(n_delays) * (laser.sh_period / n_delays)
    scan = delay_scan_tdse(cfg, laser, grid, taus, absorber=absorber,
                           workers=workers, backend=backend)
    return float(0.5 * (np.max(scan.results) - np.min(scan.results)))


def power_scan(cfg: JunctionConfig, laser: LaserConfig, grid: GridSpec,
               field_values, *, enhancement: tuple = (1.0, 1.0),
               n_delays: int = 12, absorber=None, workers: int = 1,
               backend=None) -> ScanResult:
    """Two-colour modulation amplitude versus field strength, with an
    equivalent incident-power axis (F1/enhancement)^2."""
    field_values = np.asarray(field_values, dtype=float)
    amps = [modulation_amplitude(cfg, replace(laser, field_F1=float(f)), grid,
                                 n_delays=n_delays, absorber=absorber,
                                 workers=workers, backend=backend)
            for f in field_values]
    power = (field_values / enhancement[0]) ** 2
    return ScanResult(
        "field_F1", "V_per_nm", field_values, "modulation_amplitude",
        "electrons", np.asarray(amps),
        _metadata("power", cfg, laser, grid, absorber,
                  field_values=field_values.tolist(),
                  enhancement=list(enhancement), n_delays=n_delays),
        extra_columns={"power_equiv": power})


def loglog_slopes(power, amplitude) -> np.ndarray:
    """Pairwise log-log slopes d ln A / d ln P between consecutive points."""
    lp, la = np.log(power), np.log(amplitude)
    return np.diff(la) / np.diff(lp)


def width_scan(cfg: JunctionConfig, laser: LaserConfig, grid: GridSpec,
               d_values, *, n_delays: int = 12, absorber=None,
               workers: int = 1, backend=None) -> ScanResult:
    """Modulation amplitude versus junction width at fixed field, with a
    least-squares exponential fit A0 exp(-d/L) in the metadata."""
    d_values = np.asarray(d_values, dtype=float)
    amps = np.asarray(
        [modulation_amplitude(replace(cfg, width_d=float(d)), laser, grid,
                              n_delays=n_delays, absorber=absorber,
                              workers=workers, backend=backend)
         for d in d_values])
    fit = exponential_fit(d_values, amps)
    return ScanResult(
        "width_d", "nm", d_values, "modulation_amplitude", "electrons", amps,
        _metadata("width", cfg, laser, grid, absorber,
                  d_values=d_values.tolist(), n_delays=n_delays, fit=fit))


def exponential_fit(x, y) -> dict:
    """Linear least squares on ln y = ln A0 - x/L; returns A0, L, R^2."""
    ly = np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(x, ly, 1)
    pred = slope * np.asarray(x) + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    return {"amplitude": float(np.exp(intercept)),
            "decay_length": float(-1.0 / slope) if slope < 0 else float("inf"),
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0}


def directionality(cfg: JunctionConfig, laser: LaserConfig, grid: GridSpec,
                   ratio_values, *, absorber=None, workers: int = 1,
                   backend=None) -> ScanResult:
    """Directionality Delta = |(J+ - J-)/(J+ + J-)| versus SH/fundamental
    intensity ratio (eta = sqrt(ratio)).

    J+ and J- are the two directions' integrated transferred charges
    (tip->sample and, via parity, sample->tip). A sign-split of one run's
    instantaneous boundary current fails both limits of the observable:
    it gives Delta = 0.6 for a symmetric single-colour pulse (one-sided
    emission) while the net current's split never saturates; the
    directional totals reproduce both.
    """
    ratio_values = np.asarray(ratio_values, dtype=float)
    shared = initial_state(cfg, grid)

    def one(ratio):
        las = replace(laser, ratio_eta=float(np.sqrt(ratio)))
        jp, jm = directional_transfers(cfg, las, grid, absorber=absorber,
                                       initial=shared, backend=backend)
        return abs(jp - jm) / (jp + jm) if jp + jm > 0 else 0.0

    deltas = _pmap(one, ratio_values, workers)
    return ScanResult("intensity_ratio", "dimensionless", ratio_values,
                      "directionality", "dimensionless", np.asarray(deltas),
                      _metadata("ratio", cfg, laser, grid, absorber,
                                ratio_values=ratio_values.tolist()))


ROBUSTNESS_PARAMETERS = ("field", "ratio", "width", "workfunction")


def robustness_sweep(parameter: str, values, cfg: JunctionConfig,
                     laser: LaserConfig, grid: GridSpec, *, absorber=None,
                     workers: int = 1, backend=None) -> ScanResult:
    """Burst FWHM at the vacuum-sample boundary versus one parameter
    around the anchor point (field / intensity ratio / width / tip
    workfunction)."""
    if parameter not in ROBUSTNESS_PARAMETERS:
        raise ValueError(f"parameter must be one of {ROBUSTNESS_PARAMETERS}")
    values = np.asarray(values, dtype=float)

    def one(v):
        c, l = cfg, laser
        if parameter == "field":
            l = replace(laser, field_F1=float(v))
        elif parameter == "ratio":
            l = replace(laser, ratio_eta=float(np.sqrt(v)))
        elif parameter == "width":
            c = replace(cfg, width_d=float(v))
        else:
            c = replace(cfg, workfunction_tip=float(v))
        t0, t1 = default_time_span(l, burst_only=True)
        res = propagate(c, l, grid, t0, t1, probes=(None,),
                        absorber=absorber, backend=backend)
        bm = burst_metrics(res.records[0], crest_time=field_crest_time(l),
                           cycle_fs=2.0 * np.pi / l.omega)
        return bm.fwhm

    fwhms = _pmap(one, values, workers)
    units = {"field": "V_per_nm", "ratio": "dimensionless", "width": "nm",
             "workfunction": "eV"}
    return ScanResult(parameter, units[parameter], values, "burst_fwhm", "as",
                      np.asarray(fwhms),
                      _metadata("robustness", cfg, laser, grid, absorber,
                                parameter=parameter, values=values.tolist()))


def delay_scan_strongfield(cfg: JunctionConfig, laser: LaserConfig,
                           tau0_values, **kwargs) -> ScanResult:
    """Strong-field model delay scan wrapped as a ScanResult."""
    tau0_values = np.asarray(tau0_values, dtype=float)
    out = strongfield.delay_scan_sf(laser, cfg, tau0_values, **kwargs)
    md = {"kind": "delay_sf", "junction": asdict(cfg), "laser": asdict(laser),
          "tau0_values": tau0_values.tolist(), "code_version": __version__}
    return ScanResult("tau0", "fs", tau0_values, "net_directional_weight",
                      "normalized", out, md)


def _configs_from_metadata(md):
    cfg = JunctionConfig(**md["junction"])
    laser = LaserConfig(**md["laser"])
    grid = GridSpec(**md["grid"]) if md.get("grid") else None
    absorber = AbsorberSpec(**md["absorber"]) if md.get("absorber") else None
    return cfg, laser, grid, absorber


def rerun_from_metadata(scan: ScanResult, *, workers: int = 1,
                        backend: str | None = None) -> ScanResult:
    """Re-execute a scan from its own metadata snapshot."""
    md = scan.metadata
    kind = md["kind"]
    cfg, laser, grid, absorber = _configs_from_metadata(md)
    if kind == "delay":
        return delay_scan_tdse(cfg, laser, grid, md["tau0_values"],
                               absorber=absorber, workers=workers,
                               backend=backend)
    if kind == "power":
        return power_scan(cfg, laser, grid, md["field_values"],
                          enhancement=tuple(md["enhancement"]),
                          n_delays=md["n_delays"], absorber=absorber,
                          workers=workers, backend=backend)
    if kind == "width":
        return width_scan(cfg, laser, grid, md["d_values"],
                          n_delays=md["n_delays"], absorber=absorber,
                          workers=workers, backend=backend)
    if kind == "ratio":
        return directionality(cfg, laser, grid, md["ratio_values"],
                              absorber=absorber, workers=workers,
                              backend=backend)
    if kind == "robustness":
        return robustness_sweep(md["parameter"], md["values"], cfg, laser,
                                grid, absorber=absorber, workers=workers,
                                backend=backend)
    if kind == "delay_sf":
        return delay_scan_strongfield(cfg, laser, md["tau0_values"])
    raise ValueError(f"unknown scan kind {kind!r}")
