use nalgebra::{DMatrix, DVector};

/// Christoffel symbols of the second kind, `Gamma^k_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub(crate) d: usize,
    pub(crate) data: Vec<f64>,
}

impl Christoffel {
    pub(crate) fn zeros(d: usize) -> Christoffel {
        Christoffel {
            d,
            data: vec![0.0; d * d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `Gamma^k_{ij}`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.d + i) * self.d + j]
    }

    pub(crate) fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let d = self.d;
        self.data[(k * d + i) * d + j] = v;
    }

    /// The matrix `(Gamma^k_{ij})_{k,j}` for a fixed direction `i`.
    pub fn direction_matrix(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.d, |k, j| self.get(k, i, j))
    }

    /// `Gamma(X, Y)^k = Gamma^k_{ij} X^i Y^j`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.d;
        DVector::from_fn(d, |k, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += self.get(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }
}

/// The `(1,3)` curvature tensor with components `R^l_{kij}`, acting as
/// `R(X, Y)Z = R^l_{kij} X^i Y^j Z^k e_l`.
///
/// Sign convention: `R(X,Y)Z = nabla_[X,Y] Z - [nabla_X, nabla_Y] Z`. With it
/// the sectional curvature is `g(R(X,Y)X, Y) / |X ^ Y|^2` and the Ricci
/// tensor is `S(X,Y) = tr(Z -> R(X,Z)Y)`; both are positive on round spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    pub(crate) d: usize,
    pub(crate) data: Vec<f64>,
}

impl Riemann {
    pub(crate) fn zeros(d: usize) -> Riemann {
        Riemann {
            d,
            data: vec![0.0; d * d * d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `R^l_{kij}`.
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let d = self.d;
        self.data[((l * d + k) * d + i) * d + j]
    }

    pub(crate) fn set(&mut self, l: usize, k: usize, i: usize, j: usize, v: f64) {
        let d = self.d;
        self.data[((l * d + k) * d + i) * d + j] = v;
    }

    /// The endomorphism `Z -> R(X, Y)Z` as a matrix. Summed over `i < j`
    /// with the wedge `X^i Y^j - X^j Y^i`, so swapping `X` and `Y` negates
    /// the result exactly.
    pub fn operator(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let d = self.d;
        let mut wedge = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
        for i in 0..d {
            for j in (i + 1)..d {
                wedge.push((i, j, x[i] * y[j] - x[j] * y[i]));
            }
        }
        DMatrix::from_fn(d, d, |l, k| {
            wedge
                .iter()
                .map(|&(i, j, w)| self.get(l, k, i, j) * w)
                .sum()
        })
    }

    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.operator(x, y) * z
    }

    /// `g(R(X,Y)Z, W)`.
    pub fn lowered(
        &self,
        g: &DMatrix<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> f64 {
        (g * self.apply(x, y, z)).dot(w)
    }

    pub fn sectional(&self, g: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let area = (g * x).dot(x) * (g * y).dot(y) - (g * x).dot(y).powi(2);
        self.lowered(g, x, y, x, y) / area
    }

    /// `S_{jk} = R^i_{k j i}`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(d, d, |j, k| (0..d).map(|i| self.get(i, k, j, i)).sum())
    }
}
