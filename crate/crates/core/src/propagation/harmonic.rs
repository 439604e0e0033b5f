//! Dense bivariate polynomials and a harmonic basis Re/Im (x+iy)^k.

use rand::Rng;

use crate::geometry::Point;

/// Σ c[i][j] xⁱ yʲ (offset to `center`).
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    pub coeffs: Vec<Vec<f64>>,
    pub center: Point,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Poly2 {
    pub fn zero(degree: usize) -> Self {
        Poly2 { coeffs: vec![vec![0.0; degree + 1]; degree + 1], center: [0.0, 0.0] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (x, y) = (p[0] - self.center[0], p[1] - self.center[1]);
        // Horner in x, then y
        self.coeffs.iter().rev().fold(0.0, |acc, row| acc * x + row.iter().rev().fold(0.0, |a, c| a * y + c))
    }

    pub fn laplacian(&self) -> Poly2 {
        let d = self.degree();
        let mut out = Poly2 { coeffs: vec![vec![0.0; d + 1]; d + 1], center: self.center };
        for i in 0..=d {
            for j in 0..=d {
                let c = self.coeffs[i][j];
                if c == 0.0 {
                    continue;
                }
                if i >= 2 {
                    out.coeffs[i - 2][j] += c * (i * (i - 1)) as f64;
                }
                if j >= 2 {
                    out.coeffs[i][j - 2] += c * (j * (j - 1)) as f64;
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Poly2, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }
}

/// Re and Im of (x+iy)^k for k = 0..=degree (the constant once): 2·degree + 1 polynomials
/// with integer coefficients, zero-padded to `degree`.
pub fn harmonic_basis(degree: usize) -> Vec<Poly2> {
    let mut out = Vec::new();
    for k in 0..=degree {
        let mut re = Poly2::zero(degree);
        let mut im = Poly2::zero(degree);
        // (x+iy)^k = Σ_m C(k,m) x^{k−m} (iy)^m
        for m in 0..=k {
            let c = binom(k, m);
            match m % 4 {
                0 => re.coeffs[k - m][m] += c,
                1 => im.coeffs[k - m][m] += c,
                2 => re.coeffs[k - m][m] -= c,
                _ => im.coeffs[k - m][m] -= c,
            }
        }
        out.push(re);
        if k > 0 {
            out.push(im);
        }
    }
    out
}

/// Random combination of the basis with N(0,1)-like weights scaled by 1/(k+1).
pub fn random_harmonic<R: Rng>(degree: usize, center: Point, rng: &mut R) -> Poly2 {
    let mut p = Poly2::zero(degree);
    p.center = center;
    for (idx, b) in harmonic_basis(degree).iter().enumerate() {
        let k = idx.div_ceil(2);
        let w: f64 = rng.gen_range(-1.0..1.0);
        p.add_scaled(b, w / (k + 1) as f64);
    }
    p
}
