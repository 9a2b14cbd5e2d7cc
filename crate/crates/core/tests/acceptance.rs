//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::Instant;

use wdistill::channels::{noisy_w_with_fidelity, ChannelKind};
use wdistill::experiments::{
    fidelity_with_chi, nonmonotonic_witness, ppt_boundary, ppt_minimum_eigenvalue, random_branch_stats,
    retrieval_threshold, simulated_yield, structural_checks, yield_curve, Classification, RandomParams,
};
use wdistill::protocol::{distill_run, run_p, Party, ProtocolConfig, Termination};
use wdistill::qmath::{DensityMatrix, Operator, StateVector};
use wdistill::wstructure::{dual_w_basis_vector, relabel_unitary, w_basis_vector, WLabel};
use wdistill::Complex;

type Outcome = (bool, String);

/// The recurrence written out term by term: returns (F', p).
fn recurrence(f: f64) -> (f64, f64) {
    let g = 1.0 - f;
    let num = 25.0 / 81.0 * f * f * f + f * g * g / 18.0 + g * g * g / 324.0;
    let den = 25.0 / 81.0 * f * f * f + f * f * g / 9.0 + 2.0 / 27.0 * f * g * g + 17.0 / 162.0 * g * g * g;
    (num / den, den)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Ratio(i128, i128);

impl Ratio {
    fn new(n: i128, d: i128) -> Self {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(n, d).max(1) * d.signum();
        Ratio(n / g, d / g)
    }
    fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Ratio) -> Ratio {
        Ratio::new(self.0 * o.0, self.1 * o.1)
    }
}

/// Numerator and denominator of the recurrence at `f`, exactly.
fn recurrence_exact(f: Ratio) -> (Ratio, Ratio) {
    let g = Ratio::new(1, 1).add(Ratio::new(-f.0, f.1));
    let c = |n, d| Ratio::new(n, d);
    let f3 = f.mul(f).mul(f);
    let g3 = g.mul(g).mul(g);
    let num = c(25, 81)
        .mul(f3)
        .add(c(1, 18).mul(f).mul(g).mul(g))
        .add(c(1, 324).mul(g3));
    let den = c(25, 81)
        .mul(f3)
        .add(c(1, 9).mul(f).mul(f).mul(g))
        .add(c(2, 27).mul(f).mul(g).mul(g))
        .add(c(17, 162).mul(g3));
    (num, den)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for f in grid(1.0 / 3.0, 1.0, 20) {
        let sigma = noisy_w_with_fidelity(ChannelKind::Dephasing, f).unwrap();
        let step = run_p(&sigma).unwrap();
        let (fp, p) = recurrence(f);
        worst = worst.max((step.fidelity - fp).abs()).max((step.p_success - p).abs());
    }
    (worst <= 1e-9, format!("20 grid points, max |delta| = {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let at_one = run_p(&noisy_w_with_fidelity(ChannelKind::Dephasing, 1.0).unwrap()).unwrap();
    let one_fixed = (at_one.fidelity - 1.0).abs() < 1e-12 && (recurrence(1.0).0 - 1.0).abs() < 1e-15;

    let interior = grid(1.0 / 3.0, 1.0, 2001);
    let attractive = interior[1..interior.len() - 1].iter().all(|&f| recurrence(f).0 > f);
    let sampled = [0.34, 0.5, 0.8, 0.99].iter().all(|&f| {
        run_p(&noisy_w_with_fidelity(ChannelKind::Dephasing, f).unwrap())
            .unwrap()
            .fidelity
            > f
    });

    let (num, den) = recurrence_exact(Ratio::new(1, 3));
    let exact = num == Ratio::new(180, 8748) && den == Ratio::new(540, 8748);
    let third = Ratio::new(num.0 * den.1, num.1 * den.0) == Ratio::new(1, 3);
    let sim = run_p(&noisy_w_with_fidelity(ChannelKind::Dephasing, 1.0 / 3.0).unwrap()).unwrap();
    let repulsive_sim = (sim.fidelity - 1.0 / 3.0).abs() < 1e-12;

    let ok = one_fixed && attractive && sampled && exact && third && repulsive_sim;
    (
        ok,
        format!(
            "F=1 -> {:.15}; F'>F on (1/3,1): {}; exact at 1/3: {}/{} = 1/3 ({}), simulated {:.15}",
            at_one.fidelity,
            attractive && sampled,
            num.0 * (8748 / num.1),
            den.0 * (8748 / den.1),
            exact && third,
            sim.fidelity
        ),
    )
}

fn criterion_3() -> Outcome {
    let cfg = ProtocolConfig::default();
    let t = retrieval_threshold(ChannelKind::Dephasing, 0.005, &cfg).unwrap();
    let third = 1.0 / 3.0;
    let thr_ok = (t.f_threshold - third).abs() <= 0.005 && t.bracket_width <= 0.005;

    let (lo, hi) = ppt_boundary(ChannelKind::Dephasing, 1e-8).unwrap();
    let crossing = 0.5 * (lo + hi);
    let min_eig = |f: f64| {
        let rho = noisy_w_with_fidelity(ChannelKind::Dephasing, f).unwrap();
        Party::ALL
            .iter()
            .map(|&p| ppt_minimum_eigenvalue(&rho, p).unwrap())
            .fold(f64::INFINITY, f64::min)
    };
    let at = min_eig(third);
    let above = min_eig(third + 1e-6);
    let ppt_ok = (crossing - third).abs() <= 1e-6 && at.abs() <= 1e-9 && above < 0.0;
    (
        thr_ok && ppt_ok,
        format!(
            "retrieval threshold {:.6} (width {:.1e}); PPT crossing {:.9}, min eig at 1/3 {:.1e}, at 1/3+1e-6 {:.1e}",
            t.f_threshold, t.bracket_width, crossing, at, above
        ),
    )
}

fn chi_oracle() -> Operator {
    let s = 0.5;
    let phi = [0.0, s, s, 0.0, s, 0.0, 0.0, -s];
    let phi2 = [-s, 0.0, 0.0, s, 0.0, s, s, 0.0];
    let mut chi = Operator::zeros(8, 8);
    for i in 0..8 {
        for j in 0..8 {
            chi[(i, j)] = Complex::new(0.5 * (phi[i] * phi[j] + phi2[i] * phi2[j]), 0.0);
        }
    }
    chi
}

fn distance_to_chi_orbit(rho: &DensityMatrix) -> f64 {
    let chi = chi_oracle();
    WLabel::all()
        .map(|k| relabel_unitary(k).conjugate(&chi).max_abs_diff(rho.as_operator()))
        .fold(f64::INFINITY, f64::min)
}

fn criterion_4() -> Outcome {
    let cfg = ProtocolConfig::default();
    let t = retrieval_threshold(ChannelKind::Depolarizing, 0.005, &cfg).unwrap();
    let thr_ok = (t.f_threshold - 0.48).abs() <= 0.02;

    let run = |f: f64| {
        let rho = noisy_w_with_fidelity(ChannelKind::Depolarizing, f).unwrap();
        distill_run(&rho, 200, 0.99, &cfg).unwrap()
    };
    let mut fails = Vec::new();
    for f in [0.37, 0.40, 0.43, 0.45, t.bracket.0] {
        let traj = run(f);
        let last = traj.final_state();
        fails.push((
            f,
            traj.termination != Termination::TargetReached,
            traj.final_fidelity(),
            fidelity_with_chi(last),
            distance_to_chi_orbit(last),
        ));
    }
    let branch_ok = fails
        .iter()
        .all(|&(_, failed, fin, chi_f, dist)| failed && (fin - 0.375).abs() <= 1e-3 && chi_f >= 0.99 && dist < 1e-3);
    let summary: Vec<String> = fails
        .iter()
        .map(|(f, _, fin, chi_f, d)| format!("F0={f:.4}: F={fin:.6}, chi fidelity {chi_f:.4}, dist {d:.1e}"))
        .collect();
    // Below the partial-transpose bound the runs stop at a different state; reported, not scored.
    let below = run(0.30);
    (
        thr_ok && branch_ok,
        format!(
            "threshold {:.4} (width {:.1e}); {}; [info] F0=0.30 ends at F={:.6} with chi fidelity {:.4}",
            t.f_threshold,
            t.bracket_width,
            summary.join("; "),
            below.final_fidelity(),
            fidelity_with_chi(below.final_state())
        ),
    )
}

fn criterion_5() -> Outcome {
    let target = 0.99;
    let fs = grid(0.34, 1.0, 4000);
    let curve = yield_curve(&fs, target).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();

    // oracle: iterate the recurrence in the test itself
    for p in &curve {
        let (mut f, mut y, mut k) = (p.fidelity, 1.0, 0usize);
        while f < target {
            let (fp, den) = recurrence(f);
            y *= den / 3.0;
            f = fp;
            k += 1;
        }
        if k != p.steps || (y - p.yield_value).abs() > 1e-12 * y.max(1e-300) {
            ok = false;
        }
        if p.fidelity >= target && (p.steps != 0 || p.yield_value != 1.0) {
            ok = false;
        }
        if p.steps == 1 && (p.yield_value - recurrence(p.fidelity).1 / 3.0).abs() > 1e-15 {
            ok = false;
        }
    }

    // stairs: rising smoothly within a plateau, a jump wherever the step count changes
    let mut jumps = 0;
    let mut max_inner_ratio: f64 = 1.0;
    let mut min_jump_ratio = f64::INFINITY;
    let mut monotone = true;
    for w in curve.windows(2) {
        let ratio = w[1].yield_value / w[0].yield_value;
        monotone &= ratio >= 1.0;
        if w[0].steps == w[1].steps {
            max_inner_ratio = max_inner_ratio.max(ratio);
        } else {
            jumps += 1;
            min_jump_ratio = min_jump_ratio.min(ratio);
        }
    }
    let stairs = monotone && max_inner_ratio < 1.5 && min_jump_ratio > 3.0 && jumps >= 5;
    ok &= stairs;
    notes.push(format!(
        "{jumps} step-count changes on [0.34, 1], min jump factor {min_jump_ratio:.2}, max within-plateau factor {max_inner_ratio:.4}"
    ));

    let sim = simulated_yield(0.5, target, &ProtocolConfig::default()).unwrap();
    let closed = wdistill::experiments::yield_at(0.5, target).unwrap();
    let cross = sim.steps == closed.steps && (sim.yield_value - closed.yield_value).abs() <= 1e-9 * closed.yield_value;
    ok &= cross;
    notes.push(format!(
        "F=0.5: {} steps, yield {:.6e} (simulated {:.6e})",
        closed.steps, closed.yield_value, sim.yield_value
    ));
    (ok, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let seed = 20_240_501;
    let high = random_branch_stats(&RandomParams::new(0.70, 0.01, 1000, seed)).unwrap();
    let mid = random_branch_stats(&RandomParams::new(0.50, 0.01, 1000, seed)).unwrap();
    let lower = |s: &wdistill::experiments::BranchStats| {
        s.fraction(Classification::Bell) + s.fraction(Classification::Undistillable)
    };
    let w_high = high.fraction(Classification::W);
    let all_three = [Classification::W, Classification::Bell, Classification::Undistillable]
        .iter()
        .all(|&c| mid.count(c) > 0);
    let ok = w_high > 0.97 && all_three && lower(&mid) > lower(&high);
    let fmt = |s: &wdistill::experiments::BranchStats| {
        Classification::ALL
            .iter()
            .map(|&c| format!("{c} {}", s.count(c)))
            .collect::<Vec<_>>()
            .join("/")
    };
    (
        ok,
        format!(
            "F=0.70: {} (W fraction {:.3}); F=0.50: {}",
            fmt(&high),
            w_high,
            fmt(&mid)
        ),
    )
}

/// W basis rows as (sign, basis index) triples.
const TABLE: [[(f64, usize); 3]; 8] = [
    [(1.0, 0b001), (1.0, 0b010), (1.0, 0b100)],
    [(1.0, 0b000), (1.0, 0b011), (-1.0, 0b101)],
    [(-1.0, 0b011), (1.0, 0b000), (1.0, 0b110)],
    [(-1.0, 0b010), (1.0, 0b001), (-1.0, 0b111)],
    [(1.0, 0b101), (-1.0, 0b110), (1.0, 0b000)],
    [(1.0, 0b100), (-1.0, 0b111), (-1.0, 0b001)],
    [(-1.0, 0b111), (-1.0, 0b100), (1.0, 0b010)],
    [(-1.0, 0b110), (-1.0, 0b101), (-1.0, 0b011)],
];

fn table_vector(k: usize) -> StateVector {
    let mut amps = vec![Complex::new(0.0, 0.0); 8];
    for &(s, i) in &TABLE[k] {
        amps[i] = Complex::new(s / 3f64.sqrt(), 0.0);
    }
    StateVector::new(amps).unwrap()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let checks = structural_checks();
    let elapsed = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();

    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let label = WLabel::from_index(k).unwrap();
        worst = worst.max(w_basis_vector(label).max_abs_diff(&table_vector(k)));
        let image = table_vector(0).evolve(&relabel_unitary(label)).unwrap();
        worst = worst.max(image.max_abs_diff(&table_vector(k)));
        for kd in 0..8 {
            let o = table_vector(k).inner(&dual_w_basis_vector(WLabel::from_index(kd).unwrap()));
            worst = worst.max((o.norm_sqr() - 0.125).abs());
        }
    }
    let ok = failed.is_empty() && elapsed < 1.0 && worst < 1e-12;
    (
        ok,
        format!(
            "{} checks, {} failed, {:.3} s; table/relabel/unbiasedness oracle max deviation {worst:.1e}",
            checks.len(),
            failed.len(),
            elapsed
        ),
    )
}

fn criterion_8() -> Outcome {
    let fs: Vec<f64> = (1..60).map(|i| 0.48 + 0.002 * i as f64).collect();
    match nonmonotonic_witness(&fs, &ProtocolConfig::default()).unwrap() {
        Some(traj) => {
            let fid = traj.fidelities();
            let drop = fid.windows(2).position(|w| w[1] < w[0]).unwrap();
            let ok = traj.initial_fidelity > 0.48
                && traj.initial_fidelity < 0.6
                && traj.classification == Classification::W
                && fid[drop + 1] < fid[drop];
            (
                ok,
                format!(
                    "depolarized F0={:.4}: step {} lowers F {:.6} -> {:.6}; reaches {:.6} after {} steps",
                    traj.initial_fidelity,
                    drop + 1,
                    fid[drop],
                    fid[drop + 1],
                    traj.final_fidelity(),
                    traj.steps.len()
                ),
            )
        }
        None => (
            false,
            "no depolarized input in (0.48, 0.6) lost fidelity on its way to W".into(),
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed-form recurrence matches simulation", criterion_1),
        ("fixed points F=1 (attractive) and F=1/3 (repulsive)", criterion_2),
        ("dephasing threshold and PPT crossing at 1/3", criterion_3),
        ("depolarizing threshold near 0.48, failures reach chi", criterion_4),
        ("yield stairs", criterion_5),
        ("random-state branches", criterion_6),
        ("structural invariants", criterion_7),
        ("nonmonotonic route to W", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {} [{}] {name}: {detail} ({:.1} s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
