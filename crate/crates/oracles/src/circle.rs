use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

const TAU: f64 = 2.0 * PI;

/// Sawtooth kernel on the circle: 1/2 − ((θ₂−θ₁) mod 2π)/2π.
pub fn circle_kernel(theta1: f64, theta2: f64) -> f64 {
    0.5 - (theta2 - theta1).rem_euclid(TAU) / TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleVariant {
    /// Round volume form dθ/2π.
    #[default]
    A,
    /// Volume form (1 + cos θ) dθ/2π.
    B,
}

/// Defining data on a circle level: harmonic basis {1, ω}, dual basis
/// {ω, −1} and the kernel whose integral operator inverts d up to p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CircleDefiningData {
    pub variant: CircleVariant,
}

impl CircleDefiningData {
    pub fn new(variant: CircleVariant) -> Self {
        CircleDefiningData { variant }
    }

    /// Coefficient of ω against dθ/2π.
    pub fn omega(&self, theta: f64) -> f64 {
        match self.variant {
            CircleVariant::A => 1.0,
            CircleVariant::B => 1.0 + theta.cos(),
        }
    }

    pub fn kernel(&self, theta1: f64, theta2: f64) -> f64 {
        let f = circle_kernel(theta1, theta2);
        match self.variant {
            CircleVariant::A => f,
            CircleVariant::B => f - (theta2.sin() - theta1.sin()) / TAU,
        }
    }

    /// Kernel with the diagonal value replaced by the mean of its one-sided
    /// limits, as trapezoid sums across the jump require.
    fn kernel_avg(&self, theta1: f64, theta2: f64) -> f64 {
        let u = (theta2 - theta1).rem_euclid(TAU);
        if u < 1e-12 || TAU - u < 1e-12 {
            self.kernel(theta1, theta2) - 0.5
        } else {
            self.kernel(theta1, theta2)
        }
    }

    /// Largest pointwise defect of id − p − dI − Id on cos(nθ) and sin(nθ),
    /// taken as both 0-forms and coefficients of dθ, for |n| ≤ `max_mode`.
    /// Integrals use the trapezoid rule on `nodes` points and d is a
    /// five-point difference with the grid spacing as step.
    pub fn homotopy_defect(&self, max_mode: u32, nodes: usize) -> f64 {
        let h = TAU / nodes as f64;
        let grid: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
        let trap = |vals: &dyn Fn(f64) -> f64| grid.iter().map(|&t| vals(t)).sum::<f64>() * h;
        let samples: Vec<usize> = (0..8).map(|j| j * nodes / 8 + nodes / 37).collect();
        let mut worst: f64 = 0.0;
        for n in 0..=max_mode {
            let nf = n as f64;
            let modes: [(Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>); 2] = [
                (Box::new(move |t| (nf * t).cos()), Box::new(move |t| -nf * (nf * t).sin())),
                (Box::new(move |t| (nf * t).sin()), Box::new(move |t| nf * (nf * t).cos())),
            ];
            for (g, dg) in &modes {
                let avg0 = trap(&|t| g(t) * self.omega(t)) / TAU;
                let avg1 = trap(&|t| g(t)) / TAU;
                for &i in &samples {
                    let t2 = grid[i];
                    // g as a 0-form: g − p g = I(dg).
                    let idg = trap(&|t1| dg(t1) * self.kernel_avg(t1, t2));
                    worst = worst.max((g(t2) - avg0 - idg).abs());
                    // g dθ as a 1-form: g − p g = d I(g dθ).
                    let ig = |j: isize| {
                        let t = grid[(i as isize + j).rem_euclid(nodes as isize) as usize];
                        trap(&|t1| g(t1) * self.kernel_avg(t1, t))
                    };
                    let d = (-ig(2) + 8.0 * ig(1) - 8.0 * ig(-1) + ig(-2)) / (12.0 * h);
                    worst = worst.max((g(t2) - avg1 * self.omega(t2) - d).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert!(circle_kernel(0.3, 0.3 + PI).abs() < 1e-15);
        assert!((circle_kernel(1.0, 1.0 + 1e-12) - 0.5).abs() < 1e-9);
        assert!((circle_kernel(1.0, 1.0 - 1e-12) + 0.5).abs() < 1e-9);
    }

    #[test]
    fn jump_is_plus_one_across_the_diagonal() {
        let t = 2.0;
        let jump = circle_kernel(t - 1e-9, t) - circle_kernel(t + 1e-9, t);
        assert!((jump - 1.0).abs() < 1e-6);
    }

    #[test]
    fn homotopy_identity_on_fourier_modes() {
        for v in [CircleVariant::A, CircleVariant::B] {
            let defect = CircleDefiningData::new(v).homotopy_defect(8, 1 << 14);
            assert!(defect < 1e-6, "{v:?}: {defect}");
        }
    }

    #[test]
    fn flipped_jump_breaks_the_identity() {
        let flipped = |t1: f64, t2: f64| -circle_kernel(t1, t2);
        let n = 1 << 10;
        let h = TAU / n as f64;
        let t2 = 1.0;
        let idg: f64 = (0..n).map(|i| -(i as f64 * h).sin() * flipped(i as f64 * h, t2)).sum::<f64>() * h;
        assert!((t2.cos() - idg).abs() > 0.5);
    }
}
