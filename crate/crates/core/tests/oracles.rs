//! Values checked against closed forms and independent 1D quadrature.

use std::f64::consts::{LN_2, PI};

use logsp::logkernel::cell_mean_log_constant;
use logsp::manifolds::{log_spaced, nehari_fiber, nehari_project, NehariFiber};
use logsp::*;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn fixture() -> GridSpec {
    GridSpec::new(12.0, 256).unwrap()
}

fn gauss(spec: GridSpec) -> GridFunction {
    GridFunction::gaussian(spec, 1.0, 1.0, [0.0, 0.0]).unwrap()
}

/// Composite Simpson on `[a, b]` with `panels` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Exponential integral `E1(x)` for `x > 0`.
fn e1(x: f64) -> f64 {
    if x < 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..300 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

fn gaussian_n0() -> f64 {
    PI / 4.0 * (LN_2 - EULER_GAMMA)
}

#[test]
fn exponential_integral_reference_values() {
    assert!((e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
    assert!((e1(2.0) - 0.048_900_510_708_061_19).abs() < 1e-15);
}

#[test]
fn grid_integrals() {
    let spec = fixture();
    assert!((spec.spacing() - 0.09375).abs() < 1e-15);
    let one = GridFunction::sample(GridSpec::new(10.0, 128).unwrap(), |_, _| 1.0).unwrap();
    assert!((one.integrate() - 400.0).abs() < 1e-12);
    let g = GridFunction::sample(spec, |x, y| (-(x * x + y * y)).exp()).unwrap();
    assert!((g.integrate() - PI).abs() < 1e-8);
    let odd = GridFunction::sample(spec, |x, _| x).unwrap();
    assert!(odd.integrate().abs() < 1e-12);
    let u = gauss(spec);
    assert!((u.lp_norm_p(2.0).unwrap() - PI).abs() < 1e-8);
    assert!((u.lp_norm_p(4.0).unwrap() - PI / 2.0).abs() < 1e-8);
    assert!((u.h1_seminorm_sq() - PI).abs() < 1e-6);
}

#[test]
fn star_norm_of_gaussian() {
    let want = 2.0 * PI * simpson(|r| r * (1.0 + r).ln() * (-r * r).exp(), 0.0, 12.0, 24_000);
    assert!((want - 1.901_083_437_144_466).abs() < 1e-12);
    let got = gauss(fixture()).star_norm_sq();
    assert!((got - want).abs() / want < 1e-6, "{got} vs {want}");
}

#[test]
fn unit_cell_log_mean() {
    let closed = PI / 4.0 - 1.5 - 0.5 * LN_2;
    assert!((cell_mean_log_constant() - closed).abs() < 1e-12);
    let spec = fixture();
    let t = KernelTables::build_with(spec, Regularization::CellMean);
    let want = spec.spacing().ln() + closed;
    assert!((t.kernel_at(KernelId::Log, 0, 0) - want).abs() < 1e-12);
    assert_eq!(t.kernel_at(KernelId::LogOnePlus, 1, 0), (1.0 + spec.spacing()).ln());
}

#[test]
fn gaussian_kernel_functionals() {
    let spec = fixture();
    let t = KernelTables::shared(spec);
    let [n0, n1, n2] = t.n_all(&gauss(spec)).unwrap();
    let want0 = gaussian_n0();
    assert!((n0 - want0).abs() / want0 < 1e-8, "{n0} vs {want0}");
    // N1 = (1/2π)(π/2) ∫ log(1+|z|) e^{-|z|²/2} dz
    let want1 = 0.5 * PI * simpson(|r| r * (1.0 + r).ln() * (-0.5 * r * r).exp(), 0.0, 24.0, 48_000);
    assert!((n1 - want1).abs() / want1 < 1e-4, "{n1} vs {want1}");
    assert!(n2 > 0.0);
    assert!((n0 - (n1 - n2)).abs() <= 1e-10 * (n1.abs() + n2.abs()));
}

#[test]
fn log_potential_of_gaussian_density() {
    let spec = fixture();
    let t = KernelTables::shared(spec);
    let rho = GridFunction::sample(spec, |x, y| (-(x * x + y * y)).exp()).unwrap();
    let w = t.convolve(KernelId::Log, &rho).unwrap();
    let mut worst = 0.0f64;
    for k in 0..spec.len() {
        let (x, y) = spec.position(k);
        let r2 = x * x + y * y;
        if !(0.25..=36.0).contains(&r2) {
            continue;
        }
        let want = 0.5 * PI * r2.ln() + 0.5 * PI * e1(r2);
        worst = worst.max((w.values()[k] - want).abs() / want.abs().max(1.0));
    }
    assert!(worst < 1e-5, "worst {worst}");
}

#[test]
fn energy_of_gaussian_at_unit_potential() {
    let spec = fixture();
    let tables = KernelTables::shared(spec);
    let u = gauss(spec);
    let free = Problem::new(ProblemParams::new(4.0, 0.0).unwrap(), PotentialModel::constant(1.0).unwrap(), tables.clone());
    let r = free.energy(&u).unwrap();
    assert!((r.norm_sq - 2.0 * PI).abs() < 1e-6);
    let want = PI + 0.25 * gaussian_n0();
    assert!((r.I - want).abs() < 1e-6, "{} vs {want}", r.I);
    let focusing = Problem::new(ProblemParams::new(4.0, 1.0).unwrap(), PotentialModel::constant(1.0).unwrap(), tables);
    let rf = focusing.energy(&u).unwrap();
    assert!((r.I - rf.I - PI / 8.0).abs() < 1e-8);
}

#[test]
fn nehari_maximizer_closed_form() {
    let spec = fixture();
    let pr = Problem::new(ProblemParams::new(4.0, 1.0).unwrap(), PotentialModel::well1(), KernelTables::shared(spec));
    let u = gauss(spec);
    let r = pr.energy(&u).unwrap();
    let closed = NehariFiber::from_report(&r, pr.params()).closed_form_p4().unwrap();
    let want = (r.norm_sq / (r.lp - gaussian_n0())).sqrt();
    assert!((closed - want).abs() / want < 1e-6);
    let proj = nehari_project(&pr, &u, 1e-12).unwrap();
    assert!((proj.t_star - closed).abs() / closed < 1e-8);
    let half = nehari_project(&pr, &u.scale(2.0), 1e-12).unwrap();
    assert!((half.t_star - 0.5 * proj.t_star).abs() / proj.t_star < 1e-8);

    let scan = nehari_fiber(&pr, &u, &log_spaced(0.01, 100.0, 400).unwrap()).unwrap();
    assert_eq!(scan.sign_changes(), 1);
    let k = scan.derivative_values.iter().position(|&d| d < 0.0).unwrap();
    assert!(scan.t_values[k - 1] < closed && closed <= scan.t_values[k]);
}

#[test]
fn builtin_potential_values() {
    let w1 = PotentialModel::well1();
    assert_eq!(w1.value(0.0, 0.0), 0.5);
    assert!((w1.radial_derivative_sq(2.0) - 0.25).abs() < 1e-15);
    assert_eq!(w1.calv(0.0, 0.0), 0.5);
    let w2 = PotentialModel::well2();
    assert_eq!(w2.value(0.0, 0.0), 0.5);
    assert!((w2.value(1e6, 0.0) - 1.0).abs() < 1e-1);
    assert_eq!(w2.radial_derivative(0.0, 0.0), 0.0);
    let c = PotentialModel::constant(1.0).unwrap();
    assert_eq!(c.value(5.0, 3.0), 1.0);
    assert_eq!(c.calv(5.0, 3.0), 1.0);
}
