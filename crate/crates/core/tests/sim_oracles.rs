use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwoa_core::instances::{generate_instance, WeightDist, WeightedGraph};
use qwoa_core::landscape::ObjectiveTable;
use qwoa_core::reference::{apply_gate, apply_phase_separator_gates, evolve_gates, hadamard};
use qwoa_core::schedule::{optimize, OptimizerConfig, DEFAULT_START};
use qwoa_core::sim::{
    evolve, grover_required_iterations, grover_success_probability, LayerSchedule, Statevector,
};

type Mat = Vec<Vec<Complex64>>;

fn zeros(d: usize) -> Mat {
    vec![vec![Complex64::new(0.0, 0.0); d]; d]
}

fn identity(d: usize) -> Mat {
    let mut m = zeros(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (da, db) = (a.len(), b.len());
    let mut m = zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    m[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut m = zeros(d);
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

fn add_scaled(a: &mut Mat, b: &Mat, s: Complex64) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x += s * y;
        }
    }
}

/// `Σ_q X_q` with qubit 0 as the rightmost (least significant) factor.
fn transverse_field(n: usize) -> Mat {
    let x: Mat = vec![
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ];
    let i2 = identity(2);
    let mut h = zeros(1 << n);
    for q in 0..n {
        let mut term = identity(1);
        for pos in (0..n).rev() {
            term = kron(&term, if pos == q { &x } else { &i2 });
        }
        add_scaled(&mut h, &term, Complex64::new(1.0, 0.0));
    }
    h
}

/// `e^{A}` by scaling and squaring with a degree-24 Taylor polynomial.
fn expm(a: &Mat) -> Mat {
    let d = a.len();
    let norm: f64 = a.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = 0.5f64.powi(squarings);
    let mut scaled = a.clone();
    for r in &mut scaled {
        for z in r {
            *z *= scale;
        }
    }
    let mut result = identity(d);
    let mut term = identity(d);
    for k in 1..=24 {
        term = matmul(&term, &scaled);
        for r in &mut term {
            for z in r.iter_mut() {
                *z /= k as f64;
            }
        }
        add_scaled(&mut result, &term, Complex64::new(1.0, 0.0));
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

fn random_state(n: usize, rng: &mut impl Rng) -> Statevector {
    let mut amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Statevector::from_amplitudes(amps).unwrap()
}

fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    generate_instance(n, 0.5, WeightDist::default(), rng).unwrap().graph
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn mixer_matches_dense_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 2, 4, 6] {
        let h = transverse_field(n);
        for _ in 0..3 {
            let t: f64 = rng.gen_range(-1.5..1.5);
            let mut a = h.clone();
            for r in &mut a {
                for z in r {
                    *z *= Complex64::new(0.0, -t);
                }
            }
            let u = expm(&a);
            let psi = random_state(n, &mut rng);
            let want: Vec<Complex64> = (0..1 << n)
                .map(|i| (0..1 << n).map(|j| u[i][j] * psi.amplitudes()[j]).sum())
                .collect();
            let got = psi.mixed(t);
            assert!(max_diff(got.amplitudes(), &want) < 1e-10, "n={n} t={t}");
        }
    }
}

#[test]
fn phase_separator_matches_gate_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let g = random_graph(6, &mut rng);
        let table = ObjectiveTable::build(&g).unwrap();
        let gamma: f64 = rng.gen_range(-3.0..3.0);
        let psi = random_state(6, &mut rng);
        let fast = psi.phase_separated(&table, gamma).unwrap();
        let mut slow = psi.amplitudes().to_vec();
        apply_phase_separator_gates(&mut slow, &g, gamma);
        assert!(max_diff(fast.amplitudes(), &slow) < 1e-10);
    }
}

#[test]
fn evolve_matches_gate_circuit_at_n8() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let g = random_graph(8, &mut rng);
        let table = ObjectiveTable::build(&g).unwrap();
        let sched = LayerSchedule::new(
            (0..3).map(|_| rng.gen_range(0.0..3.0)).collect(),
            (0..3).map(|_| rng.gen_range(0.0..0.7)).collect(),
        )
        .unwrap();
        let fast = evolve(&table, &sched).unwrap();
        let slow = evolve_gates(&g, &sched).unwrap();
        assert!(max_diff(fast.amplitudes(), slow.amplitudes()) < 1e-9);
    }
}

#[test]
fn hadamards_on_zero_give_equal_superposition() {
    let n = 5;
    let mut amps = Statevector::basis(n, 0).unwrap().amplitudes().to_vec();
    for q in 0..n {
        apply_gate(&mut amps, q, &hadamard());
    }
    let uniform = Statevector::equal_superposition(n).unwrap();
    assert!(max_diff(&amps, uniform.amplitudes()) < 1e-15);
}

fn kahan(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

#[test]
fn expectation_matches_compensated_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let g = random_graph(10, &mut rng);
        let table = ObjectiveTable::build(&g).unwrap();
        let psi = random_state(10, &mut rng);
        let want = kahan((0..1u64 << 10).map(|b| psi.amplitudes()[b as usize].norm_sqr() * g.cut_value(b)));
        let got = psi.expectation(&table).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs());
    }
}

#[test]
fn tuned_state_amplifies_optima() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_graph(10, &mut rng);
    let table = ObjectiveTable::build(&g).unwrap();
    let res = optimize(&table, 3, DEFAULT_START, &OptimizerConfig::default()).unwrap();
    let sched = qwoa_core::schedule::expand_schedule(res.params, 3, table.sigma()).unwrap();
    let prob = evolve(&table, &sched).unwrap().optimal_probability(&table).unwrap();
    assert!(prob > table.degeneracy() as f64 / 1024.0);
}

/// Grover iteration as an explicit rotation in the (unmarked, marked) plane.
fn grover_by_rotation(n_space: f64, marked: f64, p: u64) -> f64 {
    let (mut u, mut m) = (((n_space - marked) / n_space).sqrt(), (marked / n_space).sqrt());
    let s = [u, m];
    for _ in 0..p {
        m = -m;
        let overlap = s[0] * u + s[1] * m;
        u = 2.0 * overlap * s[0] - u;
        m = 2.0 * overlap * s[1] - m;
    }
    m * m
}

#[test]
fn grover_closed_form_matches_rotation_recurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let n_space = 2f64.powi(rng.gen_range(2..20));
        let marked = rng.gen_range(1..=(n_space as u64 / 2).min(64)) as f64;
        let p = rng.gen_range(0..40);
        let a = grover_success_probability(n_space, marked, p).unwrap();
        let b = grover_by_rotation(n_space, marked, p);
        assert!((a - b).abs() < 1e-9, "N={n_space} M={marked} p={p}: {a} vs {b}");
    }
}

#[test]
fn grover_required_iterations_by_scan() {
    for (n_space, marked, target) in [(1024.0, 2.0, 0.10), (4096.0, 1.0, 0.5), (65536.0, 2.0, 0.1)] {
        let want = (0u64..)
            .find(|&p| ((2 * p + 1) as f64 * (marked / n_space as f64).sqrt().asin()).sin().powi(2) >= target)
            .unwrap();
        assert_eq!(grover_required_iterations(n_space, marked, target).unwrap(), want);
    }
    assert_eq!(grover_required_iterations(1024.0, 2.0, 0.10).unwrap(), 4);
}

#[test]
fn grover_small_ratio_amplification() {
    let n_space = 2f64.powi(40);
    let amp = grover_success_probability(n_space, 1.0, 20).unwrap() * n_space;
    assert!((amp - 1681.0).abs() / 1681.0 < 0.01);
    assert!((grover_success_probability(4.0, 1.0, 1).unwrap() - 1.0).abs() < 1e-12);
}
