use lowrank::linalg::*;
use lowrank::rpca::*;
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn randn(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

fn build(d: usize, seed: u64, additive: bool) -> (Array2<f64>, Vec<usize>) {
    let (m, per) = (5 * d, 20 * d);
    let n = 5 * per;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((m, n));
    for b in 0..5usize {
        let basis = skinny_svd(&randn(m, d, &mut rng)).unwrap().u;
        let coeff = randn(d, per, &mut rng);
        x.slice_mut(ndarray::s![.., (b * per)..((b + 1) * per)]).assign(&basis.dot(&coeff));
    }
    let mut truth: Vec<usize> = rand::seq::index::sample(&mut rng, n, (n as f64 * 0.15) as usize).into_vec();
    truth.sort_unstable();
    for &j in &truth {
        for i in 0..m {
            let g: f64 = rng.sample(StandardNormal);
            if additive { x[(i, j)] += g; } else { x[(i, j)] = g; }
        }
    }
    (x, truth)
}

fn main() {
    for additive in [true, false] {
        for lam in [0.25f64, 0.30, 0.334, 0.36, 0.401] {
            let mut results = Vec::new();
            for seed in 0..6u64 {
                let (x, truth) = build(5, seed, additive);
                let opts = SolverOptions { lambda: Lambda::Fixed(lam), ..Default::default() };
                let sol = solve_rpca_l21(&x, &opts).unwrap();
                let found = nonzero_columns(&sol.e);
                let extra = found.iter().filter(|j| !truth.contains(j)).count();
                let missing = truth.iter().filter(|j| !found.contains(j)).count();
                results.push(extra + missing);
            }
            println!("D=5 additive={additive} lambda={lam:.3}: hammings {results:?}");
        }
    }
}
