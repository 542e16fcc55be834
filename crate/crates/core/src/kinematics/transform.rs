use std::ops::Mul;

use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];

/// Rigid transform: row-major rotation block plus translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform<T> {
    pub rotation: [[T; 3]; 3],
    pub translation: Vec3<T>,
}

impl<T: Scalar> Default for Transform<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Scalar> Transform<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            rotation: [[o, z, z], [z, o, z], [z, z, o]],
            translation: [z; 3],
        }
    }

    pub fn from_translation(translation: Vec3<T>) -> Self {
        Self {
            translation,
            ..Self::identity()
        }
    }

    /// Modified (Craig) DH link transform `RotX(alpha) * TransX(a) * RotZ(theta) * TransZ(d)`.
    pub fn modified_dh(alpha: T, a: T, d: T, theta: T) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (st, ct) = theta.sin_cos();
        let z = T::zero();
        Self {
            rotation: [
                [ct, -st, z],
                [st * ca, ct * ca, -sa],
                [st * sa, ct * sa, ca],
            ],
            translation: [a, -sa * d, ca * d],
        }
    }

    /// Maps a point expressed in this frame into the parent frame.
    #[inline]
    pub fn apply(&self, p: &Vec3<T>) -> Vec3<T> {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    #[inline]
    pub fn compose(&self, rhs: &Self) -> Self {
        let a = &self.rotation;
        let b = &rhs.rotation;
        let mut rotation = [[T::zero(); 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Self {
            rotation,
            translation: self.apply(&rhs.translation),
        }
    }

    pub fn determinant(&self) -> T {
        let m = &self.rotation;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of `R^T R - I`.
    pub fn orthonormality_error(&self) -> T {
        let m = &self.rotation;
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let dot = m[0][i] * m[0][j] + m[1][i] * m[1][j] + m[2][i] * m[2][j];
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

impl<T: Scalar> Mul for Transform<T> {
    type Output = Transform<T>;

    fn mul(self, rhs: Self) -> Self::Output {
        self.compose(&rhs)
    }
}

impl<'a, T: Scalar> Mul<&'a Transform<T>> for &'a Transform<T> {
    type Output = Transform<T>;

    fn mul(self, rhs: &'a Transform<T>) -> Self::Output {
        self.compose(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_row_is_identity() {
        let t = Transform::<f64>::modified_dh(0.0, 0.0, 0.0, 0.0);
        assert_eq!(t, Transform::identity());
    }

    #[test]
    fn translation_only_row() {
        let t = Transform::<f64>::modified_dh(0.0, 0.18, 0.0, 0.0);
        assert_eq!(t.translation, [0.18, 0.0, 0.0]);
        assert_eq!(t.rotation, Transform::<f64>::identity().rotation);
    }

    #[test]
    fn quarter_turn_about_z_with_offset() {
        let t = Transform::<f64>::modified_dh(0.0, 0.0, 0.18, FRAC_PI_2);
        let x = t.apply(&[1.0, 0.0, 0.0]);
        assert!((x[0]).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15 && (x[2] - 0.18).abs() < 1e-15);
        assert_eq!(t.translation, [0.0, 0.0, 0.18]);
        assert!((t.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compose_translation_matches_apply() {
        let a = Transform::<f64>::modified_dh(0.3, 0.1, 0.2, -0.7);
        let b = Transform::<f64>::modified_dh(-1.1, 0.4, 0.0, 0.25);
        let p = [0.2, -0.3, 0.5];
        let lhs = (a * b).apply(&p);
        let rhs = a.apply(&b.apply(&p));
        for k in 0..3 {
            assert!((lhs[k] - rhs[k]).abs() < 1e-14);
        }
    }
}
