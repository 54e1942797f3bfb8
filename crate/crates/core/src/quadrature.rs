//! Gauss-Legendre rules and tensor-product integration over rectangles.
//!
//! Every rectangle is integrated twice, with an 8-point and a 16-point rule
//! per axis. The 16-point value is returned when the two agree to
//! [`REL_TOL`]; otherwise the integral is reported as not converged.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const REL_TOL: f64 = 1e-9;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n, seeded with the Chebyshev-like guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        s * half
    }

    /// Tensor-product integral of `f` over [x0, x1] x [y0, y1].
    pub fn integrate_rect<F: Fn(f64, f64) -> f64>(&self, rect: Rect, f: &F) -> f64 {
        let hx = 0.5 * (rect.x1 - rect.x0);
        let mx = 0.5 * (rect.x0 + rect.x1);
        let hy = 0.5 * (rect.y1 - rect.y0);
        let my = 0.5 * (rect.y0 + rect.y1);
        let mut total = 0.0;
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            let x = mx + hx * xi;
            let row: f64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(yj, wj)| wj * f(x, my + hy * yj))
                .sum();
            total += wi * row;
        }
        total * hx * hy
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn centered(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        Self {
            x0: cx - 0.5 * width,
            x1: cx + 0.5 * width,
            y0: cy - 0.5 * height,
            y1: cy + 0.5 * height,
        }
    }
}

pub fn rule8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

pub fn rule16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// 8x8 rule checked against 16x16; returns the 16x16 value.
pub fn checked_rect_integral<F: Fn(f64, f64) -> f64>(rect: Rect, f: &F) -> Result<f64> {
    let coarse = rule8().integrate_rect(rect, f);
    let fine = rule16().integrate_rect(rect, f);
    let diff = (fine - coarse).abs();
    if diff <= REL_TOL * fine.abs() || diff <= f64::MIN_POSITIVE {
        Ok(fine)
    } else {
        Err(Error::QuadratureNotConverged {
            x0: rect.x0,
            x1: rect.x1,
            y0: rect.y0,
            y1: rect.y1,
            rel_change: diff / fine.abs().max(f64::MIN_POSITIVE),
        })
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
