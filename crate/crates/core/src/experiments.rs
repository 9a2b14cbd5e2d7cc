//! Experiment drivers: distillation and yield curves, retrieval thresholds,
//! PPT sweeps, and branch statistics over random input states.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{dephasing_fidelity_map, noisy_w_with_fidelity, ChannelKind};
use crate::error::{input_err, Error, Result};
use crate::protocol::{
    distill_run, dual_measurement_operator, measurement_operator, relabel_to_canonical, run_p, OutcomePair, Party,
    ProtocolConfig, Termination, Trajectory,
};
use crate::qmath::{
    hermitian_eigenvalues, partial_transpose, random_density_hs, substream, DensityMatrix, Operator, StateVector,
    ALGEBRA_TOL,
};
use crate::wstructure::{
    dual_w_basis_vector, relabel_unitary, stabilizer, stabilizer_spectral, w_basis_vector, w_state, StabilizerSet,
    WLabel,
};

/// Step budget for a retrieval attempt.
pub const DEFAULT_MAX_STEPS: usize = 200;
/// Fidelity counted as "distilled".
pub const DEFAULT_TARGET: f64 = 0.99;
/// Fidelity with a reference state needed to recognise a fixed point.
pub const RECOGNITION_FIDELITY: f64 = 0.99;
/// A partially transposed state counts as NPT below this eigenvalue.
pub const NPT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classification {
    W,
    Bell,
    Undistillable,
    Transient,
}

impl Classification {
    pub const ALL: [Classification; 4] = [
        Classification::W,
        Classification::Bell,
        Classification::Undistillable,
        Classification::Transient,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::W => "W",
            Classification::Bell => "Bell",
            Classification::Undistillable => "Undistillable",
            Classification::Transient => "Transient",
        })
    }
}

fn real_vector(amps: &[f64]) -> StateVector {
    StateVector::normalized(amps.iter().map(|&x| x.into()).collect()).expect("non-zero literal")
}

/// `(|01⟩ + |10⟩)/√2 ⊗ |0⟩` on every ordered choice of the unpaired party,
/// in every relabeled frame: 3 × 8 candidates.
pub fn bell_candidates() -> Vec<StateVector> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // unpaired party C, B, A respectively
    let placements = [
        [0.0, 0.0, s, 0.0, s, 0.0, 0.0, 0.0], // |010⟩+|100⟩
        [0.0, s, 0.0, 0.0, s, 0.0, 0.0, 0.0], // |001⟩+|100⟩
        [0.0, s, s, 0.0, 0.0, 0.0, 0.0, 0.0], // |001⟩+|010⟩
    ];
    placements
        .iter()
        .flat_map(|amps| {
            let base = real_vector(amps);
            WLabel::all().map(move |k| base.evolve(&relabel_unitary(k)).expect("unitary"))
        })
        .collect()
}

/// The two pure states whose equal mixture is the undistillable state `χ`.
pub fn chi_components() -> [StateVector; 2] {
    [
        real_vector(&[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, -1.0]),
        real_vector(&[-1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]),
    ]
}

/// `χ = (|φ⟩⟨φ| + |φ'⟩⟨φ'|)/2`.
pub fn chi_state() -> DensityMatrix {
    let [a, b] = chi_components();
    DensityMatrix::new((&a.projector() + &b.projector()).scale_real(0.5)).expect("valid mixture")
}

/// Uhlmann fidelity `(tr √(√σ ρ √σ))²` for `σ` the uniform mixture of the
/// orthonormal `basis`. With `√σ = P/√m`, the square root only involves the
/// small Gram matrix `⟨u_i|ρ|u_j⟩/m`.
pub fn fidelity_with_uniform_mixture(rho: &DensityMatrix, basis: &[StateVector]) -> f64 {
    let m = basis.len();
    let dim = m.next_power_of_two();
    let mut gram = Operator::zeros(dim, dim);
    let images: Vec<Vec<_>> = basis.iter().map(|u| rho.as_operator().apply(u.amplitudes())).collect();
    for (i, ui) in basis.iter().enumerate() {
        for (j, img) in images.iter().enumerate() {
            let z: num_complex::Complex64 = ui.amplitudes().iter().zip(img).map(|(a, b)| a.conj() * b).sum();
            gram[(i, j)] = z / m as f64;
        }
    }
    let ev = hermitian_eigenvalues(&gram).expect("Gram matrix of a Hermitian operator");
    let root_sum: f64 = ev.iter().map(|&x| x.max(0.0).sqrt()).sum();
    root_sum * root_sum
}

/// Largest Uhlmann fidelity with `χ` over the eight relabeled frames.
pub fn fidelity_with_chi(rho: &DensityMatrix) -> f64 {
    let comps = chi_components();
    WLabel::all()
        .map(|k| {
            let r = relabel_unitary(k);
            let frame = [comps[0].evolve(&r).unwrap(), comps[1].evolve(&r).unwrap()];
            fidelity_with_uniform_mixture(rho, &frame)
        })
        .fold(0.0, f64::max)
}

/// Largest fidelity with any Bell-pair candidate.
pub fn fidelity_with_bell(rho: &DensityMatrix) -> f64 {
    bell_candidates()
        .iter()
        .map(|b| rho.expectation(b).re)
        .fold(0.0, f64::max)
}

/// Sorts a finished trajectory into one of the fixed-point branches.
///
/// Bell requires a detected fixed point; the χ branch approaches its limit
/// through a slowly decaying two-cycle, so it is recognised from the final
/// state alone.
pub fn classify_state(traj: &Trajectory) -> Classification {
    if traj.final_fidelity() >= DEFAULT_TARGET {
        return Classification::W;
    }
    let last = traj.final_state();
    if traj.termination == Termination::FixedPoint && fidelity_with_bell(last) >= RECOGNITION_FIDELITY {
        return Classification::Bell;
    }
    if fidelity_with_chi(last) >= RECOGNITION_FIDELITY {
        return Classification::Undistillable;
    }
    Classification::Transient
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub fidelity: f64,
    pub simulated: f64,
    pub closed_form: f64,
    pub p_success: f64,
}

/// Full simulation of `P` on dephased W states next to the closed form.
pub fn dephasing_curve(grid: &[f64]) -> Result<Vec<CurvePoint>> {
    grid.iter()
        .map(|&f| {
            let closed = dephasing_fidelity_map(f)?;
            let sigma = noisy_w_with_fidelity(ChannelKind::Dephasing, f)?;
            let step = run_p(&sigma)?;
            Ok(CurvePoint {
                fidelity: f,
                simulated: step.fidelity,
                closed_form: closed.fidelity,
                p_success: step.p_success,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YieldPoint {
    pub fidelity: f64,
    pub steps: usize,
    pub yield_value: f64,
}

const YIELD_ITERATION_CAP: usize = 100_000;

/// Steps and yield `Π p_i / 3^k` of the closed-form recurrence until the
/// fidelity reaches `target`.
pub fn yield_at(f: f64, target: f64) -> Result<YieldPoint> {
    if !(f > 1.0 / 3.0 && f <= 1.0) {
        return input_err(format!("fidelity {f} never reaches the target (needs F in (1/3, 1])"));
    }
    let (mut cur, mut y, mut steps) = (f, 1.0, 0);
    while cur < target {
        if steps == YIELD_ITERATION_CAP {
            return input_err(format!("fidelity {f} needs more than {YIELD_ITERATION_CAP} steps"));
        }
        let next = dephasing_fidelity_map(cur)?;
        y *= next.success_probability / 3.0;
        cur = next.fidelity;
        steps += 1;
    }
    Ok(YieldPoint {
        fidelity: f,
        steps,
        yield_value: y,
    })
}

pub fn yield_curve(grid: &[f64], target: f64) -> Result<Vec<YieldPoint>> {
    if !(target > 1.0 / 3.0 && target < 1.0) {
        return input_err(format!("target fidelity {target} outside (1/3, 1)"));
    }
    grid.iter().map(|&f| yield_at(f, target)).collect()
}

/// The same yield from the full simulator.
pub fn simulated_yield(f: f64, target: f64, config: &ProtocolConfig) -> Result<YieldPoint> {
    let sigma = noisy_w_with_fidelity(ChannelKind::Dephasing, f)?;
    let traj = distill_run(&sigma, YIELD_ITERATION_CAP, target, config)?;
    if traj.termination != Termination::TargetReached {
        return input_err(format!("simulation from F={f} did not reach {target}"));
    }
    Ok(YieldPoint {
        fidelity: f,
        steps: traj.steps.len(),
        yield_value: traj.yield_estimate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    pub kind: ChannelKind,
    pub f_threshold: f64,
    /// Largest fidelity seen failing and smallest seen succeeding.
    pub bracket: (f64, f64),
    pub bracket_width: f64,
}

/// Whether the noisy W state of fidelity `f` reaches `target` within
/// `max_steps`.
pub fn is_retrieved(kind: ChannelKind, f: f64, max_steps: usize, target: f64, config: &ProtocolConfig) -> Result<bool> {
    let rho = noisy_w_with_fidelity(kind, f)?;
    Ok(distill_run(&rho, max_steps, target, config)?.termination == Termination::TargetReached)
}

/// Bisects the initial fidelity separating failed from successful
/// retrieval, starting from the whole family range.
pub fn retrieval_threshold(kind: ChannelKind, resolution: f64, config: &ProtocolConfig) -> Result<ThresholdResult> {
    if !(resolution >= 1e-4) {
        return input_err(format!("resolution {resolution} below 1e-4"));
    }
    let (mut lo, mut hi) = (kind.min_fidelity(), DEFAULT_TARGET);
    let check = |f: f64| is_retrieved(kind, f, DEFAULT_MAX_STEPS, DEFAULT_TARGET, config);
    if check(lo)? {
        return Ok(ThresholdResult {
            kind,
            f_threshold: lo,
            bracket: (lo, lo),
            bracket_width: 0.0,
        });
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if check(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult {
        kind,
        f_threshold: 0.5 * (lo + hi),
        bracket: (lo, hi),
        bracket_width: hi - lo,
    })
}

/// Smallest eigenvalue of `ρ` partially transposed on one party's qubit.
pub fn ppt_minimum_eigenvalue(rho: &DensityMatrix, party: Party) -> Result<f64> {
    if rho.dim() != 8 {
        return input_err("PPT test expects a 3-qubit state");
    }
    let pt = partial_transpose(rho.as_operator(), &[party.ordinal()])?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptPoint {
    pub fidelity: f64,
    pub min_eigenvalue: [f64; 3],
}

pub fn ppt_sweep(kind: ChannelKind, grid: &[f64]) -> Result<Vec<PptPoint>> {
    grid.iter()
        .map(|&f| {
            let rho = noisy_w_with_fidelity(kind, f)?;
            let mut min_eigenvalue = [0.0; 3];
            for p in Party::ALL {
                min_eigenvalue[p.ordinal()] = ppt_minimum_eigenvalue(&rho, p)?;
            }
            Ok(PptPoint {
                fidelity: f,
                min_eigenvalue,
            })
        })
        .collect()
}

/// Bisects the fidelity above which the noisy W family has a negative
/// partial transpose for some party.
pub fn ppt_boundary(kind: ChannelKind, resolution: f64) -> Result<(f64, f64)> {
    let npt = |f: f64| -> Result<bool> {
        let rho = noisy_w_with_fidelity(kind, f)?;
        for p in Party::ALL {
            if ppt_minimum_eigenvalue(&rho, p)? < -NPT_TOL {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let (mut lo, mut hi) = (kind.min_fidelity(), 1.0);
    if npt(lo)? {
        return Ok((lo, lo));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if npt(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// How random inputs are brought into the fidelity window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// Mix a Hilbert-Schmidt state (after relabeling) with `|W^000⟩⟨W^000|`
    /// at the weight that hits a fidelity drawn uniformly in the window.
    #[default]
    WAdmixture,
    /// Keep Hilbert-Schmidt draws whose canonical fidelity already lies in
    /// the window. Windows far above 1/8 are essentially unreachable.
    Rejection,
}

impl std::str::FromStr for Conditioning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "admixture" => Ok(Conditioning::WAdmixture),
            "rejection" => Ok(Conditioning::Rejection),
            _ => input_err(format!("unknown conditioning {s:?}")),
        }
    }
}

impl fmt::Display for Conditioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conditioning::WAdmixture => "admixture",
            Conditioning::Rejection => "rejection",
        })
    }
}

/// Draws per sample before sampling gives up; zero acceptances over this
/// budget bounds the acceptance rate below 1e-6.
pub const REJECTION_ATTEMPTS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomParams {
    pub f_target: f64,
    pub f_window: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub max_steps: usize,
    pub target_f: f64,
    pub conditioning: Conditioning,
    pub max_attempts: u64,
    pub config: ProtocolConfig,
}

impl RandomParams {
    pub fn new(f_target: f64, f_window: f64, n_samples: usize, seed: u64) -> Self {
        Self {
            f_target,
            f_window,
            n_samples,
            seed,
            max_steps: DEFAULT_MAX_STEPS,
            target_f: DEFAULT_TARGET,
            conditioning: Conditioning::default(),
            max_attempts: REJECTION_ATTEMPTS,
            config: ProtocolConfig::default(),
        }
    }
}

/// Draws the input state of sample `index` from its own substream.
pub fn sample_input(params: &RandomParams, index: u64) -> Result<DensityMatrix> {
    let mut rng = substream(params.seed, index);
    let (lo, hi) = (params.f_target - params.f_window, params.f_target + params.f_window);
    let w = DensityMatrix::from_pure(&w_state());
    for _ in 0..params.max_attempts {
        let (sigma, _) = relabel_to_canonical(&random_density_hs(8, &mut rng)?)?;
        let f0 = sigma.expectation(&w_state()).re;
        match params.conditioning {
            Conditioning::Rejection => {
                if (lo..=hi).contains(&f0) {
                    return Ok(sigma);
                }
            }
            Conditioning::WAdmixture => {
                let target = if params.f_window > 0.0 {
                    rng.gen_range(lo..=hi)
                } else {
                    params.f_target
                };
                if f0 <= target {
                    let weight = (target - f0) / (1.0 - f0);
                    let mixed = &w.as_operator().scale_real(weight) + &sigma.as_operator().scale_real(1.0 - weight);
                    return DensityMatrix::new(mixed);
                }
            }
        }
    }
    Err(Error::Sampling {
        target: params.f_target,
        window: params.f_window,
        attempts: params.max_attempts,
        accepted: 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStat {
    pub step: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchStats {
    pub n_samples: usize,
    /// Indexed like [`Classification::ALL`].
    pub counts: [usize; 4],
    /// Per-branch mean and standard deviation of the fidelity at every
    /// step, over all samples of the branch; finished samples hold their
    /// last fidelity.
    pub mean_fidelity_by_step: [Vec<StepStat>; 4],
}

impl BranchStats {
    pub fn count(&self, c: Classification) -> usize {
        self.counts[c.slot()]
    }

    pub fn fraction(&self, c: Classification) -> f64 {
        self.count(c) as f64 / self.n_samples as f64
    }

    pub fn series(&self, c: Classification) -> &[StepStat] {
        &self.mean_fidelity_by_step[c.slot()]
    }

    fn aggregate(outcomes: &[(Classification, Vec<f64>)]) -> Self {
        let mut counts = [0usize; 4];
        let mut histories: [Vec<&[f64]>; 4] = Default::default();
        for (c, h) in outcomes {
            counts[c.slot()] += 1;
            histories[c.slot()].push(h);
        }
        let series = histories.map(|hs| {
            let len = hs.iter().map(|h| h.len()).max().unwrap_or(0);
            (0..len)
                .map(|step| {
                    let vals: Vec<f64> = hs.iter().map(|h| h[step.min(h.len() - 1)]).collect();
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    StepStat {
                        step,
                        mean,
                        std: var.sqrt(),
                    }
                })
                .collect()
        });
        Self {
            n_samples: outcomes.len(),
            counts,
            mean_fidelity_by_step: series,
        }
    }
}

/// Runs the recurrence on `n_samples` random inputs with fidelity in
/// `f_target ± f_window` and groups them by the fixed point they reach.
///
/// Sample `i` draws from substream `i` of the seed, so results do not
/// depend on scheduling.
pub fn random_branch_stats(params: &RandomParams) -> Result<BranchStats> {
    if !(params.f_target > 0.125 && params.f_target < 1.0) {
        return input_err(format!("target fidelity {} outside (1/8, 1)", params.f_target));
    }
    if !(params.f_window >= 0.0) {
        return input_err("fidelity window must be non-negative");
    }
    if params.n_samples == 0 {
        return input_err("need at least one sample");
    }
    let outcomes: Vec<(Classification, Vec<f64>)> = (0..params.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let rho = sample_input(params, i)?;
            let traj = distill_run(&rho, params.max_steps, params.target_f, &params.config)?;
            Ok((traj.classification, traj.fidelities()))
        })
        .collect::<Result<_>>()?;
    Ok(BranchStats::aggregate(&outcomes))
}

/// A structural check: name, outcome and the worst deviation seen.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
}

impl CheckResult {
    fn within(name: &'static str, worst: f64, tol: f64) -> Self {
        Self {
            name,
            passed: worst <= tol,
            worst,
        }
    }
}

/// Grid used by the closed-form comparison: 20 points spanning `[1/3, 1]`.
pub fn oracle_grid() -> Vec<f64> {
    (0..20).map(|i| 1.0 / 3.0 + (2.0 / 3.0) * i as f64 / 19.0).collect()
}

/// Algebraic invariants of the W basis, both measurements, and the
/// agreement of the simulated recurrence with its closed form.
pub fn structural_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for s in StabilizerSet::all() {
        let k = stabilizer(s).matrix;
        for label in WLabel::all() {
            let v = w_basis_vector(label);
            let kv = k.apply(v.amplitudes());
            let expected = s.sign_on(label);
            for (a, b) in kv.iter().zip(v.amplitudes()) {
                worst = worst.max((a - b * expected).norm());
            }
        }
    }
    out.push(CheckResult::within(
        "stabilizer eigenvalue table (64 pairs)",
        worst,
        ALGEBRA_TOL,
    ));

    let mut worst = 0.0f64;
    for a in StabilizerSet::all() {
        let ka = stabilizer(a).matrix;
        worst = worst.max(ka.max_abs_diff(&stabilizer_spectral(a)));
        for b in StabilizerSet::all() {
            let kb = stabilizer(b).matrix;
            let ab = ka.matmul(&kb);
            worst = worst.max(ab.max_abs_diff(&kb.matmul(&ka)));
            worst = worst.max(ab.max_abs_diff(&stabilizer(a.product(b)).matrix));
        }
    }
    out.push(CheckResult::within(
        "stabilizer group closure and commutation",
        worst,
        ALGEBRA_TOL,
    ));

    let identity = Operator::identity(8);
    for (name, dual) in [
        ("measurement completeness (W basis)", false),
        ("measurement completeness (dual basis)", true),
    ] {
        let sum = OutcomePair::ALL.iter().fold(Operator::zeros(8, 8), |acc, &m| {
            let op = if dual {
                dual_measurement_operator(m)
            } else {
                measurement_operator(m)
            };
            &acc + &op
        });
        out.push(CheckResult::within(name, sum.max_abs_diff(&identity), ALGEBRA_TOL));
    }

    let mut worst = 0.0f64;
    for k in WLabel::all() {
        for kd in WLabel::all() {
            let overlap = w_basis_vector(k).inner(&dual_w_basis_vector(kd)).norm_sqr();
            worst = worst.max((overlap - 0.125).abs());
        }
    }
    out.push(CheckResult::within(
        "mutual unbiasedness (64 pairs)",
        worst,
        ALGEBRA_TOL,
    ));

    let w = w_state();
    let worst = WLabel::all()
        .map(|k| {
            w.evolve(&relabel_unitary(k))
                .expect("unitary")
                .max_abs_diff(&w_basis_vector(k))
        })
        .fold(0.0, f64::max);
    out.push(CheckResult::within(
        "relabel unitaries regenerate the basis with signs",
        worst,
        ALGEBRA_TOL,
    ));

    let worst = match dephasing_curve(&oracle_grid()) {
        Ok(points) => points
            .iter()
            .map(|p| {
                let closed = dephasing_fidelity_map(p.fidelity).expect("grid inside [1/3, 1]");
                (p.simulated - p.closed_form)
                    .abs()
                    .max((p.p_success - closed.success_probability).abs())
            })
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    out.push(CheckResult::within(
        "simulated recurrence matches closed form (20 points)",
        worst,
        1e-9,
    ));
    out
}

/// First depolarized input on `grid` whose trajectory loses fidelity at
/// some step but still reaches the W branch.
pub fn nonmonotonic_witness(grid: &[f64], config: &ProtocolConfig) -> Result<Option<Trajectory>> {
    for &f in grid {
        let rho = noisy_w_with_fidelity(ChannelKind::Depolarizing, f)?;
        let traj = distill_run(&rho, DEFAULT_MAX_STEPS, DEFAULT_TARGET, config)?;
        let drops = traj.fidelities().windows(2).any(|w| w[1] < w[0]);
        if drops && traj.classification == Classification::W {
            return Ok(Some(traj));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{noisy_w, ChannelSpec};
    use crate::protocol::w_diagonal;
    use crate::qmath::gates::identity2;
    use crate::qmath::kron_all;

    #[test]
    fn structural_checks_pass() {
        let checks = structural_checks();
        assert_eq!(checks.len(), 7);
        for c in checks {
            assert!(c.passed, "{} worst {}", c.name, c.worst);
        }
    }

    #[test]
    fn oracle_grid_endpoints() {
        let g = oracle_grid();
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-15 && (g[19] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_has_fidelity_three_eighths() {
        let chi = chi_state();
        assert!((chi.expectation(&w_state()).re - 0.375).abs() < 1e-15);
        assert!((fidelity_with_chi(&chi) - 1.0).abs() < 1e-10);
        let [a, b] = chi_components();
        assert!(a.inner(&b).norm() < 1e-15);
    }

    #[test]
    fn bell_candidate_fidelity_is_two_thirds() {
        for b in bell_candidates() {
            let f = DensityMatrix::from_pure(&b);
            let best = w_diagonal(&f).into_iter().fold(0.0, f64::max);
            assert!((best - 2.0 / 3.0).abs() < 1e-12);
        }
        let ab0 = DensityMatrix::from_pure(&bell_candidates()[0]);
        assert!((ab0.expectation(&w_state()).re - 2.0 / 3.0).abs() < 1e-15);
        assert!((fidelity_with_bell(&ab0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_against_pure_reference() {
        // For a single pure reference vector the formula reduces to ⟨ψ|ρ|ψ⟩.
        let rho = noisy_w(&ChannelSpec::new(ChannelKind::Depolarizing, 0.6).unwrap());
        let f = fidelity_with_uniform_mixture(&rho, &[w_state()]);
        assert!((f - rho.expectation(&w_state()).re).abs() < 1e-12);
    }

    #[test]
    fn ppt_boundary_cases() {
        let third = noisy_w_with_fidelity(ChannelKind::Dephasing, 1.0 / 3.0).unwrap();
        let high = noisy_w_with_fidelity(ChannelKind::Dephasing, 0.9).unwrap();
        let prod = DensityMatrix::from_pure(&StateVector::basis(8, 0).unwrap());
        for p in Party::ALL {
            assert!(ppt_minimum_eigenvalue(&third, p).unwrap().abs() < 1e-9);
            assert!(ppt_minimum_eigenvalue(&high, p).unwrap() < -1e-3);
            assert!(ppt_minimum_eigenvalue(&prod, p).unwrap().abs() < 1e-12);
        }
        let two_qubit = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(ppt_minimum_eigenvalue(&two_qubit, Party::A).is_err());
    }

    #[test]
    fn pure_w_is_npt() {
        let w = DensityMatrix::from_pure(&w_state());
        assert!(ppt_minimum_eigenvalue(&w, Party::A).unwrap() < 0.0);
    }

    #[test]
    fn yield_plateaus() {
        let top = yield_at(0.995, 0.99).unwrap();
        assert_eq!((top.steps, top.yield_value), (0, 1.0));
        let one = yield_at(0.985, 0.99).unwrap();
        assert_eq!(one.steps, 1);
        let p = dephasing_fidelity_map(0.985).unwrap().success_probability;
        assert!((one.yield_value - p / 3.0).abs() < 1e-15);
        assert!(yield_at(1.0 / 3.0, 0.99).is_err());
        assert!(yield_curve(&[0.5], 1.0).is_err());
    }

    #[test]
    fn curve_rejects_unphysical_points() {
        assert!(dephasing_curve(&[0.2]).is_err());
    }

    #[test]
    fn aggregate_carries_finished_samples_forward() {
        let outcomes = vec![
            (Classification::W, vec![0.5, 0.8, 0.99]),
            (Classification::W, vec![0.5, 0.995]),
            (Classification::Bell, vec![0.4, 0.6]),
        ];
        let s = BranchStats::aggregate(&outcomes);
        assert_eq!(s.counts, [2, 1, 0, 0]);
        let w = s.series(Classification::W);
        assert_eq!(w.len(), 3);
        assert!((w[2].mean - (0.99 + 0.995) / 2.0).abs() < 1e-15);
        assert!((w[1].std - 0.0975).abs() < 1e-12);
        assert!(s.series(Classification::Undistillable).is_empty());
    }

    #[test]
    fn sampling_window_is_respected() {
        let params = RandomParams::new(0.7, 0.01, 10, 3);
        for i in 0..10 {
            let rho = sample_input(&params, i).unwrap();
            let f = rho.expectation(&w_state()).re;
            assert!((0.69 - 1e-12..=0.71 + 1e-12).contains(&f), "{f}");
            assert!(rho.is_valid());
            let (_, label) = relabel_to_canonical(&rho).unwrap();
            assert_eq!(label, WLabel::W000);
        }
    }

    #[test]
    fn rejection_reports_unreachable_window() {
        let mut params = RandomParams::new(0.95, 0.001, 1, 0);
        params.conditioning = Conditioning::Rejection;
        params.max_attempts = 20_000;
        match sample_input(&params, 0) {
            Err(Error::Sampling { accepted: 0, .. }) => {}
            other => panic!("expected sampling error, got {other:?}"),
        }
    }

    #[test]
    fn rejection_accepts_reachable_window() {
        let mut params = RandomParams::new(0.3, 0.02, 1, 0);
        params.conditioning = Conditioning::Rejection;
        let rho = sample_input(&params, 0).unwrap();
        let f = rho.expectation(&w_state()).re;
        assert!((0.28..=0.32).contains(&f));
    }

    #[test]
    fn random_params_are_validated() {
        assert!(random_branch_stats(&RandomParams::new(0.1, 0.01, 1, 0)).is_err());
        assert!(random_branch_stats(&RandomParams::new(0.7, 0.01, 0, 0)).is_err());
    }

    #[test]
    fn product_with_identity_is_not_a_candidate() {
        let i = identity2();
        let mixed = DensityMatrix::new(kron_all([&i, &i, &i]).scale_real(0.125)).unwrap();
        assert!(fidelity_with_bell(&mixed) < 0.2);
        assert!(fidelity_with_chi(&mixed) < 0.3);
    }
}
