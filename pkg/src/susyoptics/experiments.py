"""Scenario runners: gated metrics, plot-ready tables, deterministic CSV.

Each runner takes an ExperimentConfig and returns a ScenarioResult whose
scalar metrics all carry the threshold they were gated against.  Nothing
here draws; the CSV schemas are the figures.

Unit conventions: the algebra/dynamics scenarios (spectrum, susy-check,
eta-sweep) run in natural units (hbar = m = 1, lengths in x0 = 1/sqrt(omega),
energies in omega).  The bench scenarios (bdag-check, trotter-convergence)
run in the dimensionless oscillator frame, which is the frame a bench
encodes transversely; the trap frequency only rescales the time-to-distance
map and the reference distances are stated for the design step T/60.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import ExperimentConfig, config_hash
from .errors import ConfigurationError
from .evolution import (
    TrotterPlan,
    eigenbasis,
    fit_loglog_slope,
    trotter_convergence_scan,
    trotter_evolve,
    trotter_states,
)
from .grids import (
    WaveFunction,
    fidelity,
    gaussian_packet,
    make_grid,
    norm,
    normalized,
)
from .optics import (
    InterferometerSpec,
    PhysicalUnits,
    calibrate_interferometer,
    compile_trotter_train,
    interferometer_arm_trains,
    interferometric_B_dag,
    map_distance_to_time,
    map_time_to_distance,
    simulate_train,
)
from .susy import (
    Superpotential,
    apply_B_dag,
    bound_spectrum,
    check_degeneracy,
    eta_potential,
    partner_potential,
)

SCENARIO_RUNNERS = {}  # populated at the bottom of the module


@dataclass(frozen=True)
class GatedScalar:
    """One named metric plus the acceptance gate it was checked against."""

    name: str
    value: float
    gate: str
    passed: bool


@dataclass(frozen=True)
class Table:
    """One CSV-able series: column names and rows (tuples or a 2-d array)."""

    name: str
    columns: tuple
    rows: object
    notes: tuple = ()


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    config_hash: str
    tool_version: str
    defaulted_keys: tuple
    scalars: tuple
    tables: tuple
    texts: tuple = ()

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.scalars)


def _gate_range(name, value, lo, hi) -> GatedScalar:
    value = float(value)
    return GatedScalar(name, value, f"{lo!r} <= value <= {hi!r}",
                       bool(lo <= value <= hi))


def _gate_below(name, value, bound) -> GatedScalar:
    value = float(value)
    return GatedScalar(name, value, f"value <= {bound!r}", bool(value <= bound))


def _gate_abs_below(name, value, bound) -> GatedScalar:
    value = float(value)
    return GatedScalar(name, value, f"|value| <= {bound!r}", bool(abs(value) <= bound))


def _gate_fidelity(name, fid_modulus, lo, hi, convention) -> GatedScalar:
    """Gate a fidelity given in modulus convention, reporting per config.

    The gate windows are modulus-convention; under modulus_squared both
    the value and the window map through x -> x^2 (monotone, so the verdict
    is identical).
    """
    if convention == "modulus_squared":
        return _gate_range(name, fid_modulus**2, lo**2, hi**2)
    return _gate_range(name, fid_modulus, lo, hi)


# --- scenario building blocks -------------------------------------------------

def _natural_setup(cfg: ExperimentConfig):
    """Grid, superpotential and initial state in natural units."""
    x0 = 1.0 / math.sqrt(cfg.omega)
    grid = make_grid(cfg.grid_points, cfg.x_min_x0 * x0, cfg.x_max_x0 * x0)
    W = Superpotential(cfg.omega, cfg.barrier_amplitude, cfg.sigma_over_x0 * x0)
    psi0 = gaussian_packet(grid, cfg.x_center_x0 * x0, cfg.state_width_x0 * x0)
    return grid, W, psi0


def _bench_setup(cfg: ExperimentConfig):
    """Dimensionless oscillator frame plus the physical units that realize it."""
    grid = make_grid(cfg.grid_points, cfg.x_min_x0, cfg.x_max_x0)
    W = Superpotential(1.0, cfg.barrier_amplitude, cfg.sigma_over_x0)
    psi0 = gaussian_packet(grid, cfg.x_center_x0, cfg.state_width_x0)
    units = PhysicalUnits(cfg.wavelength_nm * 1e-9, cfg.x0_mm * 1e-3)
    aperture_m = cfg.aperture_x0 * units.x0_m
    return grid, W, psi0, units, aperture_m


def make_random_states(grid, count, seed, center=0.0, width=1.0, modes=4,
                       decay=0.8):
    """Smooth random test states: Gaussian-enveloped Hermite superpositions.

    Band-limited by construction (polynomial times Gaussian), so ladder
    operators act on them without amplifying grid noise; raw white-noise
    states would probe the discretization, not the physics.  Coefficients
    are complex normal with geometric damping `decay` per mode.
    """
    if count < 1:
        raise ConfigurationError(f"battery needs at least one state, got {count}")
    rng = np.random.default_rng(seed)
    u = (grid.x - center) / width
    modes_ = [np.exp(-0.5 * u * u)]
    for m in range(1, modes + 1):
        nxt = math.sqrt(2.0 / m) * u * modes_[-1]
        if m >= 2:
            nxt -= math.sqrt((m - 1) / m) * modes_[-2]
        modes_.append(nxt)
    states = []
    for _ in range(count):
        coeff = (rng.standard_normal(modes + 1)
                 + 1j * rng.standard_normal(modes + 1)) * decay ** np.arange(modes + 1)
        vals = sum(c * h for c, h in zip(coeff, modes_))
        states.append(normalized(WaveFunction(grid, vals)))
    return states


def _long_table(name, columns, row_coord, col_coord, surface, notes=()) -> Table:
    """(row, col, value) long-format table from a 2-d surface."""
    m, n = surface.shape
    rows = np.column_stack([
        np.repeat(np.asarray(row_coord, dtype=float), n),
        np.tile(np.asarray(col_coord, dtype=float), m),
        surface.ravel(),
    ])
    return Table(name, columns, rows, notes)


def _result(cfg, scenario, scalars, tables, texts=()) -> ScenarioResult:
    return ScenarioResult(scenario, config_hash(cfg), __version__,
                          tuple(cfg.defaulted_keys), tuple(scalars),
                          tuple(tables), tuple(texts))


# --- runners -------------------------------------------------------------------

def run_spectrum(cfg: ExperimentConfig) -> ScenarioResult:
    """Partner potentials, their low spectra, and the offset-degeneracy report.

    The pairing gate is E1_n against E2_(n+1) within 1e-6 omega; the leftover
    ground state of V2 must sit at zero energy on the same tolerance.
    """
    grid, W, _ = _natural_setup(cfg)
    v1 = partner_potential(W, 1, grid)
    v2 = partner_potential(W, 2, grid)
    k = cfg.spectrum_levels
    s1 = bound_spectrum(v1, k)
    s2 = bound_spectrum(v2, k + 1)
    tol = 1e-6 * cfg.omega
    report = check_degeneracy(s1, s2, tol)

    scalars = (
        _gate_below("max_paired_gap", report.max_gap, tol),
        _gate_abs_below("ground_energy_v2", report.unpaired_ground, tol),
    )
    potentials = Table(
        "potentials", ("x", "V1", "V2"),
        np.column_stack([grid.x, v1.values, v2.values]))
    levels = Table(
        "levels", ("n", "E1_n", "E2_n", "gap_E1_n_vs_E2_n1"),
        tuple((int(n), float(s1.energies[n]), float(s2.energies[n]),
               float(report.gaps[n])) for n in range(report.pair_count)),
        notes=(f"unpaired ground energy of V2: {report.unpaired_ground!r}",
               f"eigensolver: {s1.method}"))
    return _result(cfg, "spectrum", scalars, (potentials, levels))


def run_susy_check(cfg: ExperimentConfig) -> ScenarioResult:
    """The two-path dynamics check: evolve-then-raise against raise-then-evolve.

    Path one evolves the initial Gaussian under V1 and applies B+ at each
    sample; path two applies B+ first and evolves under V2.  With exact
    partner dynamics the two paths coincide for all t; the split-step and
    grid errors leave a small, slowly growing deviation.  Both paths are
    normalized per sample before densities and deviations are formed, since
    B+ output is not normalized.
    """
    grid, W, psi0 = _natural_setup(cfg)
    v1 = partner_potential(W, 1, grid)
    v2 = partner_potential(W, 2, grid)
    period = 2.0 * math.pi / cfg.omega
    dt = period / cfg.steps_per_period
    n_steps = cfg.steps_per_period * cfg.evolution_periods
    plan = TrotterPlan(dt, n_steps)
    psi_raised = apply_B_dag(psi0, W)

    times = []
    dens1, dens2, devs = [], [], []
    fid_t0 = None
    fid_final = None
    peak_dev = 0.0
    stream1 = trotter_states(psi0, v1, plan, stride=cfg.trace_stride)
    stream2 = trotter_states(psi_raised, v2, plan, stride=cfg.trace_stride)
    for (j1, s1), (j2, s2) in zip(stream1, stream2):
        assert j1 == j2
        a = normalized(apply_B_dag(s1, W))
        b = normalized(s2)
        times.append(j1 * dt)
        dens1.append(np.abs(a.values) ** 2)
        dens2.append(np.abs(b.values) ** 2)
        dev = np.abs(a.values - b.values) ** 2
        devs.append(dev)
        peak_dev = max(peak_dev, float(dev.max()))
        if j1 == 0:
            fid_t0 = fidelity(a, b)
        if j1 == n_steps:
            fid_final = fidelity(a, b)

    times = np.asarray(times)
    dens1, dens2, devs = map(np.asarray, (dens1, dens2, devs))
    convention = cfg.fidelity_convention
    scalars = (
        _gate_fidelity("fidelity_t0", fid_t0, 1.0 - 1e-12, 1.0, convention),
        _gate_fidelity("fidelity_final", fid_final, 0.9953, 0.9993, convention),
        _gate_range("peak_deviation", peak_dev, 1e-4, 10.0 ** -1.5),
    )
    note = ("states normalized per sample before densities and deviations",)
    tables = (
        _long_table("density_evolve_then_raise", ("t", "x", "density"),
                    times, grid.x, dens1, note),
        _long_table("density_raise_then_evolve", ("t", "x", "density"),
                    times, grid.x, dens2, note),
        _long_table("deviation", ("t", "x", "deviation_density"),
                    times, grid.x, devs, note),
        Table("snapshots",
              ("x", "evolve_then_raise_t0", "raise_then_evolve_t0",
               "evolve_then_raise_final", "raise_then_evolve_final",
               "deviation_final"),
              np.column_stack([grid.x, dens1[0], dens2[0], dens1[-1],
                               dens2[-1], devs[-1]])),
    )
    return _result(cfg, "susy-check", scalars, tables)


def run_eta_sweep(cfg: ExperimentConfig) -> ScenarioResult:
    """Fidelity between the two paths when path two evolves under V_eta.

    The family V_eta scales the odd barrier term; only eta = +1 reproduces
    the partner dynamics of B+, and eta = -1 marks the mirrored partner, so
    the final-time fidelity must peak at both.  The sweep reports the whole
    fidelity(eta, t) surface plus the final-time slice and gates the argmax
    on each half-axis.
    """
    grid, W, psi0 = _natural_setup(cfg)
    v1 = partner_potential(W, 1, grid)
    period = 2.0 * math.pi / cfg.omega
    dt = period / cfg.steps_per_period
    n_steps = cfg.steps_per_period * cfg.evolution_periods
    plan = TrotterPlan(dt, n_steps)
    psi_raised = apply_B_dag(psi0, W)

    reference = []  # normalized evolve-then-raise states, every step
    for _, state in trotter_states(psi0, v1, plan, stride=1):
        reference.append(normalized(apply_B_dag(state, W)))
    times = dt * np.arange(len(reference))

    etas = np.linspace(cfg.eta_min, cfg.eta_max, cfg.eta_points)
    surface = np.empty((etas.size, times.size))
    for i, eta in enumerate(etas):
        v_eta = eta_potential(W, float(eta), grid)
        for j, state in trotter_states(psi_raised, v_eta, plan, stride=1):
            surface[i, j] = fidelity(reference[j], state)

    final = surface[:, -1]
    step = float(etas[1] - etas[0])
    pos = etas > 0
    neg = etas < 0
    best_pos = float(etas[pos][np.argmax(final[pos])])
    best_neg = float(etas[neg][np.argmax(final[neg])])
    peak = float(final.max())
    convention = cfg.fidelity_convention
    if convention == "modulus_squared":
        surface = surface**2

    scalars = (
        GatedScalar("argmax_eta_positive", best_pos,
                    f"|value - 1| <= {step!r}", bool(abs(best_pos - 1.0) <= step + 1e-12)),
        GatedScalar("argmax_eta_negative", best_neg,
                    f"|value + 1| <= {step!r}", bool(abs(best_neg + 1.0) <= step + 1e-12)),
        _gate_fidelity("peak_fidelity", peak, 0.995, 1.0, convention),
    )
    tables = (
        _long_table("fidelity_surface", ("eta", "t", "fidelity"),
                    etas, times, surface),
        Table("fidelity_final", ("eta", "fidelity"),
              np.column_stack([etas, surface[:, -1]])),
    )
    return _result(cfg, "eta-sweep", scalars, tables)


def _bdag_errors(psi, spec, units, W):
    approx = interferometric_B_dag(psi, spec, units)
    target = apply_B_dag(psi, W)
    diff = approx.values - target.values
    ref = norm(target)
    rel_l2 = norm(target.with_values(diff)) / ref
    max_pt = float(np.max(np.abs(diff))) / float(np.max(np.abs(target.values)))
    infid = 1.0 - fidelity(approx, target)
    return approx, target, float(rel_l2), max_pt, float(infid)


def run_bdag_validation(cfg: ExperimentConfig) -> ScenarioResult:
    """Interferometric B+ against the algebraic operator.

    Uses the configured focal length, then a reduced one that pushes the
    paraxial figure of merit f^2/rho^2 down to its validity margin near
    2.5e3, then a battery of random smooth states checking that
    the error level is a property of the bench, not of the chosen state.
    All error measures fix the modulus overlap convention; they are error
    metrics, not reported fidelities.
    """
    grid, W, psi0, units, aperture_m = _bench_setup(cfg)
    cases = []
    profile_table = None

    spec_ref = calibrate_interferometer(
        InterferometerSpec(W, cfg.focal_length_m, aperture_m,
                           parity_mode=cfg.parity_mode), grid, units)
    approx, target, rel_ref, max_ref, infid_ref = _bdag_errors(psi0, spec_ref, units, W)
    cases.append(("reference", cfg.focal_length_m, rel_ref, max_ref, infid_ref))
    profile_table = Table(
        "profiles",
        ("x", "amp_interferometric", "phase_interferometric",
         "amp_algebraic", "phase_algebraic"),
        np.column_stack([grid.x,
                         np.abs(approx.values), np.angle(approx.values),
                         np.abs(target.values), np.angle(target.values)]),
        notes=(f"focal_length_m: {cfg.focal_length_m!r}",))

    spec_red = calibrate_interferometer(
        InterferometerSpec(W, cfg.reduced_focal_length_m, aperture_m,
                           parity_mode=cfg.parity_mode), grid, units)
    _, _, rel_red, max_red, infid_red = _bdag_errors(psi0, spec_red, units, W)
    cases.append(("reduced", cfg.reduced_focal_length_m, rel_red, max_red, infid_red))

    # Battery states sit at the aperture center: the bench is specified for
    # fields inside the aperture, and a displaced Hermite stack would spill
    # past the stops and measure its own clipping instead of the optics.
    battery = make_random_states(grid, cfg.battery_size, cfg.battery_seed,
                                 center=0.0, width=cfg.state_width_x0)
    worst_batt = 0.0
    for i, state in enumerate(battery):
        _, _, rel, mx, infd = _bdag_errors(state, spec_ref, units, W)
        worst_batt = max(worst_batt, rel)
        cases.append((f"battery_{i}", cfg.focal_length_m, rel, mx, infd))

    fom_ref = cfg.focal_length_m**2 / aperture_m**2
    fom_red = cfg.reduced_focal_length_m**2 / aperture_m**2
    scalars = (
        _gate_below("rel_l2_reference", rel_ref, 1e-5),
        _gate_below("max_pointwise_reference", max_ref, 1e-5),
        _gate_below("infidelity_reference", infid_ref, 1e-8),
        _gate_below("rel_l2_reduced", rel_red, 1e-3),
        GatedScalar("fom_reference", float(fom_ref), "value >= 2500.0",
                    bool(fom_ref >= 2500.0)),
        _gate_range("fom_reduced", fom_red, 2000.0, 3000.0),
        _gate_below("battery_error_ratio", worst_batt / rel_ref, 10.0),
    )
    errors = Table(
        "errors", ("case", "f_m", "rel_l2", "max_pointwise", "infidelity"),
        tuple(cases),
        notes=("figure of merit f^2/rho^2 uses the aperture half-width as rho",))
    lower, upper = interferometer_arm_trains(spec_ref, grid, units)
    texts = (
        ("arm_derivative_layout", lower.to_layout_text()),
        ("arm_multiplication_layout", upper.to_layout_text()),
    )
    return _result(cfg, "bdag-check", scalars, (profile_table, errors), texts)


def run_trotter_convergence(cfg: ExperimentConfig) -> ScenarioResult:
    """Step-count scaling against the diagonalization oracle, plus the bench map.

    Scans both product orders on the raise-then-evolve scenario at half a
    period.  Slopes are fitted on the relative L2 state error (the quantity
    the product-formula laws govern); the overlap infidelity is emitted
    alongside and falls twice as fast.  Also checks the design reference
    step distance, the exactness of the time<->distance round trip, and that
    the compiled plate train reproduces the abstract propagator.
    """
    grid, W, psi0, units, _ = _bench_setup(cfg)
    v2 = partner_potential(W, 2, grid)
    psi_raised = apply_B_dag(psi0, W)
    t_half = math.pi  # half a period, dimensionless
    basis = eigenbasis(v2)

    ladder = tuple(sorted(set(int(n) for n in cfg.convergence_steps) | {30, 60}))
    scan2 = trotter_convergence_scan(psi_raised, v2, t_half, ladder,
                                     order="second", basis=basis)
    scan1 = trotter_convergence_scan(psi_raised, v2, t_half, ladder,
                                     order="first", basis=basis)
    slope2 = fit_loglog_slope(scan2.steps, scan2.rel_l2_error)
    slope1 = fit_loglog_slope(scan1.steps, scan1.rel_l2_error)
    i30 = int(np.searchsorted(scan2.steps, 30))
    i60 = int(np.searchsorted(scan2.steps, 60))
    fid30 = 1.0 - float(scan2.infidelity[i30])
    ratio = float(scan2.rel_l2_error[i30] / scan2.rel_l2_error[i60])

    # design reference geometry: one T/60 step at 532 nm and 1 mm
    reference_units = PhysicalUnits(532e-9, 1e-3)
    dt_ref = 2.0 * math.pi / 60.0
    z_ref = map_time_to_distance(dt_ref, reference_units)
    roundtrip = abs(map_distance_to_time(z_ref, reference_units) - dt_ref) / dt_ref

    plan30 = TrotterPlan(dt_ref, 30)
    train = compile_trotter_train(plan30, v2, units)
    train_final = simulate_train(psi_raised, train)
    trot_final = trotter_evolve(psi_raised, v2, plan30, trace_stride=30).final_state
    mu = np.vdot(train_final.values, trot_final.values)
    aligned = train_final.values * (mu / abs(mu))
    train_dev = float(np.max(np.abs(aligned - trot_final.values))
                      / np.max(np.abs(trot_final.values)))

    convention = cfg.fidelity_convention
    scalars = (
        _gate_fidelity("fidelity_n30", fid30, 0.9993, 1.0, convention),
        _gate_range("slope_second", slope2, -2.4, -1.6),
        _gate_range("slope_first", slope1, -1.3, -0.7),
        _gate_range("l2_error_ratio_n30_n60", ratio, 3.0, 5.0),
        _gate_range("z_reference_m", z_ref, 1.2365, 1.2375),
        _gate_below("unit_roundtrip_error", roundtrip, 1e-12),
        _gate_below("train_deviation", train_dev, 1e-10),
    )
    note = ("slope fits use rel_l2_error; infidelity falls twice as fast",)
    tables = (
        Table("convergence_second", ("n", "rel_l2_error", "infidelity"),
              tuple((int(n), float(e), float(f)) for n, e, f in
                    zip(scan2.steps, scan2.rel_l2_error, scan2.infidelity)),
              notes=note),
        Table("convergence_first", ("n", "rel_l2_error", "infidelity"),
              tuple((int(n), float(e), float(f)) for n, e, f in
                    zip(scan1.steps, scan1.rel_l2_error, scan1.infidelity)),
              notes=note),
    )
    texts = (("train_layout", train.to_layout_text()),)
    return _result(cfg, "trotter-convergence", scalars, tables, texts)


def run_all(cfg: ExperimentConfig):
    """Every scenario, fixed order."""
    return tuple(runner(cfg) for _, runner in sorted(SCENARIO_RUNNERS.items()))


SCENARIO_RUNNERS.update({
    "spectrum": run_spectrum,
    "susy-check": run_susy_check,
    "eta-sweep": run_eta_sweep,
    "bdag-check": run_bdag_validation,
    "trotter-convergence": run_trotter_convergence,
})


# --- CSV emission ---------------------------------------------------------------

def _fmt_cell(cell) -> str:
    if isinstance(cell, (bool, np.bool_)):
        return "true" if cell else "false"
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return repr(float(cell))
    text = str(cell)
    if "," in text or "\n" in text:
        raise ConfigurationError(f"cell value {text!r} is not CSV-safe")
    return text


def emit_csv(result: ScenarioResult, out_dir) -> list:
    """Write one CSV per table (summary of gates first) plus any text sheets.

    Every file opens with comment lines carrying the scenario, config hash,
    tool version and defaulted keys.  Floats are written with repr (shortest
    round-trip form, locale independent), so identical configs give
    byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    provenance = [
        f"# scenario: {result.scenario}",
        f"# config_hash: {result.config_hash}",
        f"# tool_version: {result.tool_version}",
        "# defaulted_keys: " + (",".join(result.defaulted_keys) or "(none)"),
    ]
    summary = Table(
        "summary", ("metric", "value", "gate", "passed"),
        tuple((s.name, s.value, s.gate, s.passed) for s in result.scalars))
    paths = []
    for table in (summary,) + tuple(result.tables):
        path = out / f"{result.scenario}_{table.name}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in provenance:
                fh.write(line + "\n")
            for note in table.notes:
                fh.write(f"# {note}\n")
            fh.write(",".join(table.columns) + "\n")
            for row in table.rows:
                fh.write(",".join(_fmt_cell(c) for c in row) + "\n")
        paths.append(path)
    for name, content in result.texts:
        path = out / f"{result.scenario}_{name}.txt"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in provenance:
                fh.write(line + "\n")
            fh.write(content)
        paths.append(path)
    return paths
