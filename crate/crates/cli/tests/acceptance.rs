//! Acceptance run at n = 256, L = 12: one line per criterion, nonzero exit
//! if any fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use logsp::manifolds::{
    fiber_inequality_margin, log_spaced, nehari_condition, nehari_fiber, nehari_project, np_fiber, np_project,
    NehariFiber,
};
use logsp::potential::check_conditions;
use logsp::solver::{angular_deviation, mass_center, minimize};
use logsp::verify::{augmented_derivative, dilation_laws, gradient_check, kernel_split, pohozaev_split, random_smooth_field};
use logsp::*;

const L: f64 = 12.0;
const N: usize = 256;

struct Criterion {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

fn spec(n: usize) -> GridSpec {
    GridSpec::new(L, n).unwrap()
}

fn problem(n: usize, p: f64, b: f64, pot: PotentialModel) -> Problem {
    Problem::new(ProblemParams::new(p, b).unwrap(), pot, KernelTables::shared(spec(n)))
}

fn unit() -> PotentialModel {
    PotentialModel::constant(1.0).unwrap()
}

fn gauss(n: usize) -> GridFunction {
    GridFunction::gaussian(spec(n), 1.0, 1.0, [0.0, 0.0]).unwrap()
}

/// A random smooth shape scaled to the L2 mass of twice the unit Gaussian,
/// so that its fiber maximizer is resolved by the grid.
fn random_fixture(r: &mut ChaCha8Rng) -> GridFunction {
    let u = random_smooth_field(spec(N), r);
    let mass = u.values().iter().map(|v| v * v).sum::<f64>() * spec(N).cell_area();
    u.scale((4.0 * std::f64::consts::PI / mass).sqrt())
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce_97a0 ^ salt)
}

fn run(id: usize, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Criterion {
    let t0 = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Criterion {
        id,
        name,
        passed,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn kernel_split_criterion() -> Result<(bool, String)> {
    let worst = kernel_split(&problem(N, 4.0, 1.0, PotentialModel::well1()), 20, &mut rng(1))?;
    Ok((worst <= 1e-10, format!("max |N0-(N1-N2)|/(|N1|+|N2|) = {worst:.2e} <= 1e-10 over 20 fields")))
}

fn gradient_criterion() -> Result<(bool, String)> {
    let pr = problem(N, 4.0, 1.0, PotentialModel::well1());
    let worst = gradient_check(&pr, &gauss(N), 5, 1e-4, &mut rng(2))?;
    Ok((worst <= 1e-5, format!("max rel error {worst:.2e} <= 1e-5 over 5 directions")))
}

fn dilation_criterion() -> Result<(bool, String)> {
    let pr = problem(N, 4.0, 1.0, PotentialModel::well1());
    let worst = dilation_laws(&pr, &gauss(N), &[0.5, 2.0])?;
    Ok((worst <= 1e-5, format!("max rel error {worst:.2e} <= 1e-5 at t = 1/2, 2")))
}

fn augmented_criterion() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for pot in [PotentialModel::well1(), PotentialModel::well2()] {
        let pr = problem(N, 4.0, 1.0, pot);
        worst = worst.max(augmented_derivative(&pr, &gauss(N), &[-0.5, 0.0, 0.5], 1e-5)?);
    }
    Ok((worst <= 1e-5, format!("max rel error {worst:.2e} <= 1e-5 at s = -0.5, 0, 0.5, both wells")))
}

fn pohozaev_split_criterion() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (k, pot) in [PotentialModel::well1(), PotentialModel::well2()].into_iter().enumerate() {
        let pr = problem(N, 4.0, 1.0, pot);
        worst = worst.max(pohozaev_split(&pr, 20, &mut rng(5 + k as u64))?);
    }
    Ok((worst <= 1e-10, format!("max rel error {worst:.2e} <= 1e-10 over 20 fields x 2 wells")))
}

fn projection_criterion() -> Result<(bool, String)> {
    let mut nehari_worst = 0.0f64;
    let mut np_worst = 0.0f64;
    let mut closed_worst = 0.0f64;
    let mut sampled_worst = 0.0f64;
    let mut t_largest = 0.0f64;
    let mut r = rng(6);
    for pot in [PotentialModel::well1(), PotentialModel::well2(), unit()] {
        let p4 = problem(N, 4.0, 1.0, pot);
        let p3 = problem(N, 3.0, 1.0, pot);
        let mut fields = vec![gauss(N)];
        fields.extend((0..3).map(|_| random_fixture(&mut r)));
        for u in &fields {
            let rep = p4.energy(u)?;
            if nehari_condition(&rep, p4.params()) {
                let proj = nehari_project(&p4, u, 1e-12)?;
                let on = p4.energy(&proj.projected)?;
                nehari_worst = nehari_worst.max(on.Ipair.abs() / on.norm_sq);
                let closed = NehariFiber::from_report(&rep, p4.params()).closed_form_p4().expect("condition holds");
                closed_worst = closed_worst.max((proj.t_star - closed).abs() / closed);
            }
            let norm = p3.energy(u)?.norm_sq;
            let proj = np_project(&p3, u, 1e-12)?;
            let j = np_fiber(&p3, u, &[proj.t_star])?.derivative_values[0];
            np_worst = np_worst.max(j.abs() / norm);
            let sampled = p3.energy(&proj.projected)?.J;
            sampled_worst = sampled_worst.max((sampled - j).abs() / norm);
            t_largest = t_largest.max(proj.t_star);
        }
    }
    let passed = nehari_worst <= 1e-8 && np_worst <= 1e-8 && closed_worst <= 1e-8;
    Ok((
        passed,
        format!(
            "|I'(tu)tu|/|tu|^2 = {nehari_worst:.2e}, |J(Q)|/|u|^2 = {np_worst:.2e}, closed-form t* rel = {closed_worst:.2e}; all <= 1e-8 (sampled Q vs fiber J: {sampled_worst:.1e}, t* up to {t_largest:.2})"
        ),
    ))
}

fn fiber_criterion() -> Result<(bool, String)> {
    let ts = log_spaced(1e-3, 1e3, 400)?;
    let mut single = 0;
    let mut total = 0;
    let mut margin_worst = f64::INFINITY;
    let mut r = rng(7);
    for pot in [PotentialModel::well1(), PotentialModel::well2(), unit()] {
        for p in [4.0, 5.0] {
            let pr = problem(N, p, 1.0, pot);
            let u = gauss(N);
            if nehari_condition(&pr.energy(&u)?, pr.params()) {
                total += 1;
                single += (nehari_fiber(&pr, &u, &ts)?.sign_changes() == 1) as usize;
            }
        }
        for p in [3.0, 3.5, 4.0] {
            let pr = problem(N, p, 1.0, pot);
            let mut fields = vec![gauss(N), gauss(N).scale(2.5)];
            fields.extend((0..2).map(|_| random_fixture(&mut r)));
            for u in &fields {
                total += 1;
                single += (np_fiber(&pr, u, &ts)?.sign_changes() == 1) as usize;
                let i = pr.energy(u)?.I;
                margin_worst = margin_worst.min(fiber_inequality_margin(&pr, u, &ts)? / (1.0 + i.abs()));
            }
        }
    }
    let passed = single == total && margin_worst >= -1e-8;
    Ok((
        passed,
        format!("{single}/{total} scans with one sign change; min margin/(1+|I|) = {margin_worst:.2e} >= -1e-8"),
    ))
}

struct GroundStates {
    well1_p4: [SolveResult; 2],
    unit_p4: [SolveResult; 2],
    well2_p3: [SolveResult; 2],
    unit_p3: [SolveResult; 2],
}

fn solve_pair(p: f64, pot: PotentialModel) -> Result<[SolveResult; 2]> {
    let cfg = SolveConfig::default();
    Ok([minimize(&cfg, &problem(192, p, 1.0, pot))?, minimize(&cfg, &problem(N, p, 1.0, pot))?])
}

fn ground_state_criterion(gs: &GroundStates, seconds: [f64; 2]) -> Result<(bool, String)> {
    let w = &gs.well1_p4[1];
    let c = &gs.unit_p4[1];
    let mut ok = true;
    for r in [w, c] {
        ok &= r.converged && r.pohozaev_residual <= 1e-3 && !r.sign_changed;
    }
    let center = mass_center(&c.state);
    let radii: Vec<f64> = (1..=16).map(|k| 0.25 * k as f64).collect();
    let dev = angular_deviation(&c.state, center, &radii, 64);
    ok &= dev <= 1e-4;
    ok &= seconds.iter().all(|&s| s <= 600.0);
    Ok((
        ok,
        format!(
            "converged {}/{}, |P| scale {:.1e}/{:.1e} <= 1e-3, one-signed {}/{}, limit angular dev {dev:.1e} <= 1e-4, {:.0}s/{:.0}s <= 600s",
            w.converged,
            c.converged,
            w.pohozaev_residual,
            c.pohozaev_residual,
            !w.sign_changed,
            !c.sign_changed,
            seconds[0],
            seconds[1]
        ),
    ))
}

fn separation_criterion(gs: &GroundStates) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, well, lim) in [("well1 p=4", &gs.well1_p4, &gs.unit_p4), ("well2 p=3", &gs.well2_p3, &gs.unit_p3)] {
        let all = well.iter().chain(lim.iter()).all(|r| r.converged);
        let margin = lim[1].level - well[1].level;
        let drift = (well[1].level - well[0].level).abs().max((lim[1].level - lim[0].level).abs());
        ok &= all && margin > 0.0 && margin > 10.0 * drift;
        parts.push(format!("{label}: m_inf - m = {margin:.6e}, drift 192->256 {drift:.1e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn conditions_criterion() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for pot in [PotentialModel::well1(), PotentialModel::well2()] {
        let r = check_conditions(&pot, &spec(N), 64)?;
        ok &= r.all_passed();
        parts.push(format!("{} {}", pot.name(), if r.all_passed() { "pass" } else { "FAIL" }));
    }
    Ok((ok, parts.join(", ") + " (all nodes, 64 rays)"))
}

fn determinism_criterion() -> Result<(bool, String)> {
    let dir = std::env::temp_dir().join(format!("logsp-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("temp dir");
    let cfg = dir.join("verify.json");
    fs::write(
        &cfg,
        format!(r#"{{"grid": {{"L": {L}, "n": {N}}}, "problem": {{"p": 4, "b": 1}}, "potential": {{"name": "well1"}}}}"#),
    )
    .expect("write config");
    let once = || {
        Command::new(env!("CARGO_BIN_EXE_logsp"))
            .args(["verify", "--config", cfg.to_str().unwrap(), "--threads", "4"])
            .output()
            .expect("run logsp")
    };
    let (a, b) = (once(), once());
    let _ = fs::remove_dir_all(&dir);
    let same = a.stdout == b.stdout;
    let ok = same && a.status.success() && b.status.success();
    Ok((
        ok,
        format!(
            "two verify runs, 4 threads: {} bytes, identical {same}, exit {:?}/{:?}",
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ),
    ))
}

fn main() -> ExitCode {
    let mut results = vec![
        run(1, "kernel split", kernel_split_criterion),
        run(2, "gradient", gradient_criterion),
        run(3, "dilation laws", dilation_criterion),
        run(4, "augmented functional", augmented_criterion),
        run(5, "J = 2I'(u)u - P", pohozaev_split_criterion),
        run(6, "projections", projection_criterion),
        run(7, "fiber structure", fiber_criterion),
    ];
    for r in &results {
        report(r);
    }

    let t0 = Instant::now();
    let well1 = solve_pair(4.0, PotentialModel::well1());
    let t_well1 = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let unit_p4 = solve_pair(4.0, unit());
    let t_unit = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let np = solve_pair(3.0, PotentialModel::well2()).and_then(|w| Ok((w, solve_pair(3.0, unit())?)));
    let t_np = t0.elapsed().as_secs_f64();
    let tail = match (well1, unit_p4, np) {
        (Ok(well1_p4), Ok(unit_p4), Ok((well2_p3, unit_p3))) => {
            let gs = GroundStates {
                well1_p4,
                unit_p4,
                well2_p3,
                unit_p3,
            };
            vec![
                run(8, "ground states", || ground_state_criterion(&gs, [t_well1, t_unit])),
                {
                    let mut c = run(9, "well/limit separation", || separation_criterion(&gs));
                    c.seconds += t_well1 + t_unit + t_np;
                    c
                },
            ]
        }
        (a, b, c) => {
            let err = [a.err(), b.err(), c.err()].into_iter().flatten().next().map(|e| e.to_string());
            let detail = format!("solve failed: {}", err.unwrap_or_default());
            vec![
                Criterion { id: 8, name: "ground states", passed: false, detail: detail.clone(), seconds: 0.0 },
                Criterion { id: 9, name: "well/limit separation", passed: false, detail, seconds: 0.0 },
            ]
        }
    };
    let tail2 = [
        run(10, "potential conditions", conditions_criterion),
        run(11, "determinism", determinism_criterion),
    ];
    for r in tail.iter().chain(tail2.iter()) {
        report(r);
    }
    results.extend(tail);
    results.extend(tail2);

    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(r: &Criterion) {
    println!(
        "criterion {:>2} {} {:<22} {} [{:.1}s]",
        r.id,
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.detail,
        r.seconds
    );
}
