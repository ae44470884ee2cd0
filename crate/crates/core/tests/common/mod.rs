//! Independent oracles shared by the integration tests. Nothing here calls
//! into the eigensolver or propagator under test.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli(which: char) -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    match which {
        'x' => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        'y' => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'z' => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => CMatrix::identity(2, 2),
    }
}

/// Operator acting with the given Pauli letters on the listed sites
/// (0-based, site 0 = least significant bit).
pub fn pauli_string(l: usize, ops: &[(usize, char)]) -> CMatrix {
    // Kronecker order: most significant site first, so that basis index
    // bit i corresponds to site i. Pauli z is +1 on spin up = bit set, so
    // flip the usual |0> = up convention by using index 1 for up.
    let mut out = CMatrix::identity(1, 1);
    for site in (0..l).rev() {
        let local = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map_or_else(|| pauli('i'), |(_, p)| pauli(*p));
        // basis index 0 = down, 1 = up; sigma_z(up) = +1
        let flip = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let local = &flip * local * &flip;
        out = out.kronecker(&local);
    }
    out
}

/// Full 2^L XXZ chain with bonds at `distance`.
pub fn full_xxz(l: usize, distance: usize, j: f64, alpha_z: f64) -> CMatrix {
    let dim = 1 << l;
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..l.saturating_sub(distance) {
        let k = i + distance;
        h += pauli_string(l, &[(i, 'x'), (k, 'x')]) * c(0.5 * j);
        h += pauli_string(l, &[(i, 'y'), (k, 'y')]) * c(0.5 * j);
        h += pauli_string(l, &[(i, 'z'), (k, 'z')]) * c(0.5 * j * alpha_z);
    }
    h
}

pub fn full_edge_control(l: usize, j: f64) -> CMatrix {
    (pauli_string(l, &[(0, 'z')]) + pauli_string(l, &[(l - 1, 'z')])) * c(0.5 * j)
}

pub fn full_all_to_all(l: usize, j: f64) -> CMatrix {
    let dim = 1 << l;
    let mut h = CMatrix::zeros(dim, dim);
    for a in 0..l {
        for b in (a + 1)..l {
            h += pauli_string(l, &[(a, 'x'), (b, 'x')]) * c(0.5 * j);
            h += pauli_string(l, &[(a, 'y'), (b, 'y')]) * c(0.5 * j);
        }
    }
    h
}

pub fn total_sz(l: usize) -> CMatrix {
    let dim = 1 << l;
    let mut s = CMatrix::zeros(dim, dim);
    for i in 0..l {
        s += pauli_string(l, &[(i, 'z')]);
    }
    s
}

/// `exp(a)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|x| x.norm()).sum::<f64>();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * c(0.5f64.powi(squarings as i32));
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i h t)` for a Hermitian `h`.
pub fn unitary(h: &CMatrix, t: f64) -> CMatrix {
    expm(&(h * Complex64::new(0.0, -t)))
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Brody-distributed draws by inverting `CDF(s) = 1 - exp(-b s^(beta+1))`,
/// with `b` computed from the gamma function independently of the crate.
pub fn brody_samples(beta: f64, n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let b = statrs_free_gamma((beta + 2.0) / (beta + 1.0)).powf(beta + 1.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (-(1.0 - u).ln() / b).powf(1.0 / (beta + 1.0))
        })
        .collect()
}

/// Lanczos approximation (g = 7), accurate to ~1e-15 for x in [1, 2].
pub fn statrs_free_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &coef) in COEF.iter().enumerate().skip(1) {
        acc += coef / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}
