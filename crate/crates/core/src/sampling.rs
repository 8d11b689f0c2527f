//! Low-discrepancy sampling in (log r, arg).

use num_complex::Complex64;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u32) -> f64 {
    let b = b as u64;
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton sequence; `seed` offsets the starting index.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1 && dim <= PRIMES.len(), "Halton dimension must be 1..=8");
        Halton { dim, index: 1 + seed.wrapping_mul(7919) % 1_000_003 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim).map(|d| radical_inverse(i, PRIMES[d])).collect()
    }
}

/// Complex points with `log|z|` uniform-ish in `[log_r_min, log_r_max]` and
/// argument in `[arg_min, arg_max]`.
pub fn log_polar_points(
    n: usize,
    log_r_min: f64,
    log_r_max: f64,
    arg_min: f64,
    arg_max: f64,
    seed: u64,
) -> Vec<Complex64> {
    let mut h = Halton::new(2, seed);
    (0..n)
        .map(|_| {
            let u = h.next_point();
            let lr = log_r_min + (log_r_max - log_r_min) * u[0];
            let a = arg_min + (arg_max - arg_min) * u[1];
            Complex64::from_polar(lr.exp(), a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn points_stay_in_box_and_are_reproducible() {
        let a = log_polar_points(200, -1.0, 2.0, -0.5, 0.5, 3);
        let b = log_polar_points(200, -1.0, 2.0, -0.5, 0.5, 3);
        assert_eq!(a, b);
        for z in a {
            let lr = z.norm().ln();
            assert!((-1.0 - 1e-12..=2.0 + 1e-12).contains(&lr));
            assert!(z.arg().abs() <= 0.5 + 1e-12);
        }
        assert_ne!(log_polar_points(5, 0.0, 1.0, 0.0, 1.0, 1), log_polar_points(5, 0.0, 1.0, 0.0, 1.0, 2));
    }
}
