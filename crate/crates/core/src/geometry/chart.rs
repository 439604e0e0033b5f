//! Local graph charts: a rigid frame plus a sampled profile `x_n = φ(x')`.
//!
//! In the frame of a chart the domain lies above the graph, i.e. the second
//! local axis is the inward normal at the chart origin.

use serde::{Deserialize, Serialize};

use super::polygon::{add, dot, scale, sub, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub id: usize,
    /// World position of the chart origin P.
    pub origin: Point,
    /// Angle of the local tangent axis.
    pub angle: f64,
    /// Profile is sampled on `[-radius, radius]`.
    pub radius: f64,
    /// Uniform samples of φ, odd count so that the middle sample is x' = 0.
    pub samples: Vec<f64>,
    pub accessible: bool,
}

/// The three terms of the normalized C^{1,1} norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C11Norm {
    pub sup: f64,
    pub grad: f64,
    pub hess: f64,
}

impl C11Norm {
    pub fn total(&self) -> f64 {
        self.sup + self.grad + self.hess
    }

    /// Name of the largest weighted term.
    pub fn dominant(&self) -> &'static str {
        if self.hess >= self.grad && self.hess >= self.sup {
            "hessian"
        } else if self.grad >= self.sup {
            "gradient"
        } else {
            "sup"
        }
    }
}

impl Chart {
    pub fn step(&self) -> f64 {
        2.0 * self.radius / (self.samples.len() - 1) as f64
    }

    pub fn abscissa(&self, j: usize) -> f64 {
        -self.radius + j as f64 * self.step()
    }

    pub fn tangent(&self) -> Point {
        [self.angle.cos(), self.angle.sin()]
    }

    /// Inward normal at the origin.
    pub fn normal(&self) -> Point {
        [-self.angle.sin(), self.angle.cos()]
    }

    pub fn to_world(&self, local: Point) -> Point {
        add(self.origin, add(scale(self.tangent(), local[0]), scale(self.normal(), local[1])))
    }

    pub fn to_local(&self, p: Point) -> Point {
        let d = sub(p, self.origin);
        [dot(d, self.tangent()), dot(d, self.normal())]
    }

    /// Cubic Lagrange interpolation of the profile; clamps outside the disk.
    pub fn eval(&self, u: f64) -> f64 {
        let n = self.samples.len();
        if n < 4 {
            let s = (u + self.radius) / self.step();
            let j = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
            let t = s - j as f64;
            return self.samples[j] * (1.0 - t) + self.samples[j + 1] * t;
        }
        let s = ((u + self.radius) / self.step()).clamp(0.0, (n - 1) as f64);
        let j0 = ((s.floor() as isize) - 1).clamp(0, n as isize - 4) as usize;
        let t = s - j0 as f64;
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - b as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * self.samples[j0 + a];
        }
        acc
    }

    /// Sampled first derivative (second order, one-sided at the ends).
    pub fn derivative_samples(&self) -> Vec<f64> {
        let n = self.samples.len();
        let h = self.step();
        let f = &self.samples;
        (0..n)
            .map(|j| {
                if n < 3 {
                    (f[n - 1] - f[0]) / (2.0 * self.radius)
                } else if j == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
                } else {
                    (f[j + 1] - f[j - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Normalized C^{1,1} norm with length weight `rho0`; the Lipschitz
    /// constant of φ' is measured as the largest slope between neighbouring
    /// derivative samples.
    pub fn c11_norm(&self, rho0: f64) -> C11Norm {
        let d = self.derivative_samples();
        let h = self.step();
        let sup = self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let grad = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lip = d.windows(2).fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs() / h));
        C11Norm { sup, grad: rho0 * grad, hess: rho0 * rho0 * lip }
    }

    pub fn centre_index(&self) -> usize {
        self.samples.len() / 2
    }

    /// World coordinates of every profile sample.
    pub fn world_samples(&self) -> Vec<Point> {
        (0..self.samples.len())
            .map(|j| self.to_world([self.abscissa(j), self.samples[j]]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola(radius: f64, n: usize) -> Chart {
        let h = 2.0 * radius / (n - 1) as f64;
        Chart {
            id: 0,
            origin: [0.0, 0.0],
            angle: 0.0,
            radius,
            samples: (0..n).map(|j| {
                let u = -radius + j as f64 * h;
                0.5 * u * u
            }).collect(),
            accessible: true,
        }
    }

    #[test]
    fn parabola_norm_terms() {
        let c = parabola(1.0, 41);
        let nrm = c.c11_norm(1.0);
        assert!((nrm.sup - 0.5).abs() < 1e-14);
        assert!((nrm.grad - 1.0).abs() < 1e-13);
        assert!((nrm.hess - 1.0).abs() < 1e-10);
        assert!((nrm.total() - 2.5).abs() < 1e-10);
    }

    #[test]
    fn cubic_interp_reproduces_cubics() {
        let n = 21;
        let r = 0.5;
        let h = 2.0 * r / (n - 1) as f64;
        let f = |u: f64| 0.3 * u * u * u - u * u + 0.1;
        let c = Chart {
            id: 1,
            origin: [1.0, 2.0],
            angle: 0.7,
            radius: r,
            samples: (0..n).map(|j| f(-r + j as f64 * h)).collect(),
            accessible: false,
        };
        for k in 0..50 {
            let u = -r + 2.0 * r * k as f64 / 49.0;
            assert!((c.eval(u) - f(u)).abs() < 1e-13);
        }
    }

    #[test]
    fn frame_round_trip() {
        let c = parabola(0.3, 11);
        let c = Chart { angle: 1.1, origin: [0.2, -0.4], ..c };
        let p = [0.7, 0.1];
        let q = c.to_world(c.to_local(p));
        assert!((p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15);
    }
}
