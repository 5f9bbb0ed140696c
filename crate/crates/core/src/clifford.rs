//! Clifford multiplication and chirality in the fixed 2x2 representation
//!
//! ```text
//! sigma_1 = [[0, 1], [-1, 0]]     sigma_2 = [[0, i], [i, 0]]
//! Gamma   = i sigma_1 sigma_2 = diag(-1, 1)
//! ```

use crate::spinor::{SpinorField, C64, I, ONE, ZERO};

pub type Mat2 = [[C64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn mat_scale(a: &Mat2, s: C64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

#[inline]
pub fn apply(a: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Max-entry distance between two matrices.
pub fn mat_dist(a: &Mat2, b: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            d = d.max((a[r][c] - b[r][c]).norm());
        }
    }
    d
}

pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// Direction of a Clifford multiplication, `e_1` or `e_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    E1,
    E2,
}

/// Chirality sign selecting `Gamma_+` or `Gamma_-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    Plus,
    Minus,
}

/// The stored representation matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    pub sigma1: Mat2,
    pub sigma2: Mat2,
    pub chirality: Mat2,
    pub proj_plus: Mat2,
    pub proj_minus: Mat2,
}

impl Default for CliffordRep {
    fn default() -> Self {
        Self::standard()
    }
}

impl CliffordRep {
    pub fn standard() -> Self {
        let sigma1 = [[ZERO, ONE], [-ONE, ZERO]];
        let sigma2 = [[ZERO, I], [I, ZERO]];
        let chirality = mat_scale(&mat_mul(&sigma1, &sigma2), I);
        let half = C64::new(0.5, 0.0);
        let proj_plus = mat_scale(&mat_add(&IDENTITY, &chirality), half);
        let proj_minus = mat_scale(&mat_add(&IDENTITY, &mat_scale(&chirality, -ONE)), half);
        Self { sigma1, sigma2, chirality, proj_plus, proj_minus }
    }

    pub fn sigma(&self, dir: Direction) -> &Mat2 {
        match dir {
            Direction::E1 => &self.sigma1,
            Direction::E2 => &self.sigma2,
        }
    }

    pub fn projector(&self, sign: Chirality) -> &Mat2 {
        match sign {
            Chirality::Plus => &self.proj_plus,
            Chirality::Minus => &self.proj_minus,
        }
    }

    /// Largest violation of the Clifford, chirality and skew-Hermitian
    /// relations by the stored matrices.
    pub fn relation_defect(&self) -> f64 {
        let s = [&self.sigma1, &self.sigma2];
        let mut defect: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let anti = mat_add(&mat_mul(s[a], s[b]), &mat_mul(s[b], s[a]));
                let expect = if a == b { mat_scale(&IDENTITY, C64::new(-2.0, 0.0)) } else { [[ZERO; 2]; 2] };
                defect = defect.max(mat_dist(&anti, &expect));
            }
            defect = defect.max(mat_dist(&adjoint(s[a]), &mat_scale(s[a], -ONE)));
        }
        let (g, p, m) = (&self.chirality, &self.proj_plus, &self.proj_minus);
        defect = defect.max(mat_dist(&mat_mul(g, g), &IDENTITY));
        defect = defect.max(mat_dist(&mat_add(p, m), &IDENTITY));
        defect = defect.max(mat_dist(&mat_mul(p, p), p));
        defect = defect.max(mat_dist(&mat_mul(m, m), m));
        defect = defect.max(mat_dist(&mat_mul(p, m), &[[ZERO; 2]; 2]));
        defect
    }
}

/// Clifford multiplication by `e_alpha`, applied to every block.
pub fn clifford_multiply(dir: Direction, psi: &SpinorField) -> SpinorField {
    let rep = CliffordRep::standard();
    let m = *rep.sigma(dir);
    psi.map_blocks(|v| apply(&m, v))
}

/// Apply `Gamma_+` or `Gamma_-` blockwise.
pub fn chirality_project(sign: Chirality, psi: &SpinorField) -> SpinorField {
    let rep = CliffordRep::standard();
    let m = *rep.projector(sign);
    psi.map_blocks(|v| apply(&m, v))
}
