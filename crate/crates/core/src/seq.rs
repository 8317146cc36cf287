//! Deterministic low-discrepancy point sets.

use std::f64::consts::PI;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
const GOLDEN: f64 = 0.618_033_988_749_894_8;

pub fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Seed-rotated Halton sequence in [0,1)^dim.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    index: u64,
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1 && dim <= PRIMES.len(), "halton dimension out of range");
        let shift = (0..dim)
            .map(|d| {
                if seed == 0 {
                    0.0
                } else {
                    (seed as f64 * (PRIMES[d] as f64).sqrt()).fract()
                }
            })
            .collect();
        Halton { dim, index: 1, shift }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|d| (radical_inverse(i, PRIMES[d]) + self.shift[d]).fract())
            .collect()
    }

    /// Next point mapped into the box [lo, hi].
    pub fn next_in_box(&mut self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        let u = self.next_point();
        u.iter()
            .zip(lo.iter().zip(hi))
            .map(|(t, (a, b))| a + t * (b - a))
            .collect()
    }
}

pub(crate) fn seed_phase(seed: u64) -> f64 {
    (seed as f64 * GOLDEN).fract()
}

/// `count` quasi-uniform unit vectors in R^dim.
///
/// 2D uses equispaced angles (seed 0 starts on the positive x axis), 3D a
/// Fibonacci lattice, higher dimensions Box-Muller on a Halton sequence.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let u = seed_phase(seed);
    match dim {
        0 => vec![],
        1 => (0..count)
            .map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect(),
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + u) / count as f64;
                vec![clean(a.cos()), clean(a.sin())]
            })
            .collect(),
        3 => {
            let ga = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let th = ga * i as f64 + 2.0 * PI * u;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let pairs = dim.div_ceil(2);
            let mut h = Halton::new(2 * pairs, seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let p = h.next_point();
                let mut v = Vec::with_capacity(2 * pairs);
                for k in 0..pairs {
                    let a = p[2 * k].max(1e-12);
                    let r = (-2.0 * a.ln()).sqrt();
                    let th = 2.0 * PI * p[2 * k + 1];
                    v.push(r * th.cos());
                    v.push(r * th.sin());
                }
                v.truncate(dim);
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 1e-9 {
                    out.push(v.into_iter().map(|x| x / n).collect());
                }
            }
            out
        }
    }
}

// Snap trig round-off so axis directions come out exact.
fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else if (x.abs() - 1.0).abs() < 1e-15 {
        x.signum()
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn directions_are_unit() {
        for dim in 1..=5 {
            for v in unit_directions(dim, 37, 3) {
                let n: f64 = v.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seed_zero_gives_axes_in_2d() {
        let d = unit_directions(2, 4, 0);
        assert_eq!(d, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn halton_fills_box() {
        let mut h = Halton::new(2, 7);
        let pts: Vec<_> = (0..1000).map(|_| h.next_point()).collect();
        let q = pts.iter().filter(|p| p[0] < 0.5 && p[1] < 0.5).count();
        assert!((230..=270).contains(&q));
    }
}
