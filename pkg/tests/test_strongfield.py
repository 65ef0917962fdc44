import numpy as np
import pytest

from attostm.config import JunctionConfig, LaserConfig
from attostm.laser import effective_keldysh, field_crest_time
from attostm.potential import mean_image_magnitude
from attostm.strongfield import (SaddleConvergenceError, action,
                                 cutoff_energy, delay_scan_sf,
                                 directional_spectrum, drift_energy_bound,
                                 emission_phase_curve, solve_saddle,
                                 trajectory, tunnelling_amplitude)
from attostm.units import EMASS, HBAR_EVFS


@pytest.fixture(scope="module")
def cfg():
    return JunctionConfig()


@pytest.fixture(scope="module")
def las8():
    return LaserConfig(field_F1=8.0)


@pytest.fixture(scope="module")
def las10():
    return LaserConfig(field_F1=10.0)


def test_action_zero_field_reduction(cfg):
    # A = 0, Vbar = 0: S = E t2 + (m d^2/2)/(t2-t1) + |E0| t1
    quiet = LaserConfig(field_F1=0.0)
    t1, t2 = 0.2 + 0.4j, 1.1 - 0.05j
    e, e0, d = 3.0, 5.1, cfg.width_d
    s = action(t1, t2, e, e0, quiet, cfg, mean_image=0.0)
    p_free = EMASS * d / (t2 - t1)
    expect = e * t2 + p_free**2 / (2 * EMASS) * (t2 - t1) + abs(e0) * t1
    assert s == pytest.approx(expect, rel=1e-12)
    with pytest.raises(ValueError):
        action(t1, t1, e, e0, quiet, cfg)


def test_action_stationary_at_saddle(cfg, las8):
    sol = solve_saddle(4.0, 5.1, las8, cfg)
    h = 1e-5
    vbar = sol.mean_image

    def s(t1, t2):
        return action(t1, t2, 4.0, 5.1, las8, cfg, mean_image=vbar)

    ds_dt1 = (s(sol.t1 + h, sol.t2) - s(sol.t1 - h, sol.t2)) / (2 * h)
    ds_dt2 = (s(sol.t1, sol.t2 + h) - s(sol.t1, sol.t2 - h)) / (2 * h)
    assert abs(ds_dt1) < 1e-8
    assert abs(ds_dt2) < 1e-8


def test_saddle_residuals_small(cfg, las8):
    for e in (0.0, 2.0, 4.4, 6.7):
        sol = solve_saddle(e, 5.1, las8, cfg)
        r1, r2, r3 = sol.residuals()
        assert max(r1, r2, r3) < 1e-8
        assert sol.t1.imag > 0


def test_emission_phase_touches_keldysh_line_eta0(cfg):
    # eta = 0, long pulse: the curve touches the standard Keldysh value
    # (SK2 is exact where emission sits exactly at the crest)
    las = LaserConfig(field_F1=10.0, ratio_eta=0.0, duration_tau1=400.0,
                      duration_tau2=400.0)
    vbar = mean_image_magnitude(cfg)
    gamma = effective_keldysh(las, 5.1 - vbar)
    energies = np.arange(0.5, 8.0, 0.25)
    phases = emission_phase_curve(energies, las, cfg)
    assert np.min(np.abs(phases - gamma)) / gamma < 0.01


def test_emission_phase_tracks_modified_gamma(cfg, las10):
    vbar = mean_image_magnitude(cfg)
    gamma = effective_keldysh(las10, 5.1 - vbar)
    cutoff = cutoff_energy(las10, cfg)
    energies = np.arange(1.0, cutoff, 0.5)
    phases = emission_phase_curve(energies, las10, cfg)
    assert np.max(np.abs(phases - gamma)) / gamma < 0.10
    # the unmodified (eta = 0) line is visibly off over the same range
    gamma_std = effective_keldysh(
        LaserConfig(field_F1=10.0, ratio_eta=0.0), 5.1 - vbar)
    assert np.min(np.abs(phases - gamma_std)) / gamma_std > 0.10


def test_im_t1_grows_with_energy_past_plateau(cfg, las10):
    # brute-force scan oracle: above the plateau the emission phase rises
    # with final energy (below ~5 eV the junction's arrival constraint
    # makes the trend shallowly inverted, unlike atomic SFA)
    energies = np.arange(5.5, 13.0, 0.5)
    phases = emission_phase_curve(energies, las10, cfg)
    assert np.all(np.diff(phases) > 0)
    sol_lo = solve_saddle(6.0, 5.1, las10, cfg)
    sol_hi = solve_saddle(12.0, 5.1, las10, cfg)
    assert sol_hi.t1.imag > sol_lo.t1.imag


def test_cutoff_monotone_in_field(cfg):
    cuts = [cutoff_energy(LaserConfig(field_F1=f), cfg) for f in (8.0, 10.0, 12.0)]
    assert all(c is not None and c > 0 for c in cuts)
    assert cuts[0] < cuts[1] < cuts[2]


def test_drift_bound_reconstructs_reported_cutoff(cfg, las10):
    # the paper's 9.17 eV figure value coincides with the field's maximal
    # drift kinetic energy, not with the 10% emission-phase departure
    assert drift_energy_bound(las10) == pytest.approx(9.17, abs=0.15)


def test_seed_independence(cfg, las8):
    base = solve_saddle(4.0, 5.1, las8, cfg)
    cycle = 2 * np.pi / las8.omega
    rng = np.random.default_rng(3)
    for _ in range(8):
        d1 = 0.05 * cycle * (rng.uniform(-1, 1) + 1j * rng.uniform(0, 1))
        d2 = 0.05 * cycle * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        try:
            sol = solve_saddle(4.0, 5.1, las8, cfg,
                               seed=(base.t1 + d1, base.t2 + d2))
        except SaddleConvergenceError:
            continue  # loud failure is acceptable; silent divergence is not
        same = abs(sol.t1 - base.t1) < 1e-8 and abs(sol.t2 - base.t2) < 1e-8
        if not same:
            # a documented different branch: still a true, physical root
            assert max(sol.residuals()) < 1e-8
            assert sol.t1.imag > 0


def test_amplitude_zero_field_and_cutoff_decay(cfg, las8):
    quiet = tunnelling_amplitude(3.0, 5.1, LaserConfig(field_F1=0.0), cfg)
    driven = tunnelling_amplitude(3.0, 5.1, las8, cfg)
    assert abs(quiet) < 1e-6 * abs(driven)
    cut = cutoff_energy(las8, cfg)
    below = abs(tunnelling_amplitude(cut - 2.0, 5.1, las8, cfg)) ** 2
    above = abs(tunnelling_amplitude(cut + 2.0, 5.1, las8, cfg)) ** 2
    assert above / below < 0.1


def test_direction_parity(cfg, las8):
    # sample->tip amplitudes equal tip->sample of the negated waveform
    for e in (2.0, 5.0):
        fwd = tunnelling_amplitude(e, 5.1, las8.flipped(), cfg, direction=1)
        bwd = tunnelling_amplitude(e, 5.1, las8, cfg, direction=-1)
        assert abs(fwd - bwd) <= 1e-8 * abs(fwd)
    # the two-colour waveform is genuinely directional once integrated over
    # the spectrum (single energies sit on multi-crest interference combs)
    e_grid = np.arange(0.5, 12.0, 0.5)
    fwd = np.trapezoid(
        directional_spectrum(las8, cfg, e_grid, direction=1) ** 2, e_grid)
    bwd = np.trapezoid(
        directional_spectrum(las8, cfg, e_grid, direction=-1) ** 2, e_grid)
    assert fwd / bwd > 2.0


def test_trajectory_exit_and_closure(cfg, las8):
    sol = solve_saddle(4.4, 5.1, las8, cfg)
    tr = trajectory(sol)
    assert tr.exit_position == pytest.approx(0.35, abs=0.05)
    assert tr.positions[-1] == pytest.approx(cfg.width_d, abs=1e-3)
    # below the cutoff Im t2 is negligible and D(Re t2) itself closes
    assert abs(tr.times[-1] - sol.t2.real) < 0.05


def test_trajectory_zero_energy_arrives_latest(cfg, las8):
    arrivals = {}
    for e in (0.0, 4.4, 6.7):
        sol = solve_saddle(e, 5.1, las8, cfg)
        arrivals[e] = trajectory(sol).times[-1]
    assert arrivals[0.0] > arrivals[4.4] > arrivals[6.7]


def test_delay_scan_sf_period_and_eta0(cfg, las8):
    taus = np.linspace(-3.0855, 3.0855, 17)
    scan = delay_scan_sf(las8, cfg, taus, energies=np.arange(0.5, 12.0, 1.0))
    assert np.max(np.abs(scan)) == pytest.approx(1.0)
    # dominant period from the zero-padded spectrum
    padded = np.fft.rfft(scan - scan.mean(), n=16 * taus.size)
    freqs = np.fft.rfftfreq(16 * taus.size, d=taus[1] - taus[0])
    period = 1.0 / freqs[np.argmax(np.abs(padded[1:])) + 1]
    assert period == pytest.approx(las8.sh_period, rel=0.03)
    flat = delay_scan_sf(LaserConfig(field_F1=8.0, ratio_eta=0.0), cfg,
                         np.linspace(0, 3.0, 5),
                         energies=np.arange(0.5, 12.0, 1.0))
    # eta = 0 output is normalized noise around zero symmetry; compare raw
    # magnitudes instead: recompute without normalization via spectra
    e_grid = np.arange(0.5, 12.0, 1.0)
    las0 = LaserConfig(field_F1=8.0, ratio_eta=0.0)
    net0 = np.trapezoid(
        directional_spectrum(las0, cfg, e_grid, direction=1) ** 2
        - directional_spectrum(las0, cfg, e_grid, direction=-1) ** 2, e_grid)
    net2 = np.trapezoid(
        directional_spectrum(las8, cfg, e_grid, direction=1) ** 2
        - directional_spectrum(las8, cfg, e_grid, direction=-1) ** 2, e_grid)
    assert abs(net0) < 0.02 * abs(net2)
