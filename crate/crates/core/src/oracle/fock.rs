use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{Family, StateSpec};

/// Dense operator on the single-mode Fock space truncated to `|0> .. |dim-1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    pub entries: DMatrix<Complex64>,
}

impl FockMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    /// Largest `|(U†U - 1)_{ij}|` for `i, j < dim / 2`.
    pub fn interior_unitarity_defect(&self) -> f64 {
        let half = self.dim() / 2;
        let product = self.entries.adjoint() * &self.entries;
        let mut worst = 0.0f64;
        for i in 0..half {
            for j in 0..half {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((product[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.entries.column(j).iter().copied().collect()
    }
}

/// Smallest Fock dimension trusted for a state carrying `mean_photons`.
pub fn required_dim(mean_photons: f64) -> usize {
    (8.0 * mean_photons + 20.0).ceil() as usize
}

fn check_dim(dim: usize, mean_photons: f64) -> Result<()> {
    let required = required_dim(mean_photons).max(2);
    if dim < required {
        return Err(Error::DimensionTooSmall { dim, required });
    }
    Ok(())
}

/// Truncated annihilation operator, `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(dim: usize) -> FockMatrix {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    FockMatrix { entries: a }
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring around a Taylor series.
fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = a.nrows();
    let norm = inf_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * Complex64::new(0.5f64.powi(squarings), 0.0);

    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..=60 {
        term = (&term * &scaled) * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
        if inf_norm(&term) <= 1e-20 * inf_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `D(α) = exp(α a† - α* a)` on the truncated space.
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> Result<FockMatrix> {
    check_dim(dim, alpha.norm_sqr())?;
    let a = annihilation(dim).entries;
    let generator = a.adjoint() * alpha - &a * alpha.conj();
    Ok(FockMatrix {
        entries: expm(&generator),
    })
}

/// `S(ξ) = exp[(ξ* a² - ξ a†²) / 2]` on the truncated space.
pub fn squeeze_matrix(xi: Complex64, dim: usize) -> Result<FockMatrix> {
    check_dim(dim, xi.norm().sinh().powi(2))?;
    let a = annihilation(dim).entries;
    let a2 = &a * &a;
    let generator = (&a2 * xi.conj() - a2.adjoint() * xi) * Complex64::new(0.5, 0.0);
    Ok(FockMatrix {
        entries: expm(&generator),
    })
}

fn interior_max_diff(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    let half = x.nrows() / 2;
    let mut worst = 0.0f64;
    for i in 0..half {
        for j in 0..half {
            worst = worst.max((x[(i, j)] - y[(i, j)]).norm());
        }
    }
    worst
}

/// Interior-block deviation of `S† a S` from `a cosh r - e^{iχ} a† sinh r`.
///
/// Column `j` of `S` spreads to photon numbers around `j cosh 2r`, so the
/// `dim / 2` block is only clean for small `r` (about `r <= 0.2` at `dim = 120`).
pub fn squeeze_bogoliubov_residual(xi: Complex64, dim: usize) -> Result<f64> {
    let s = squeeze_matrix(xi, dim)?.entries;
    let a = annihilation(dim).entries;
    let lhs = s.adjoint() * &a * &s;
    let r = xi.norm();
    let phase = Complex64::from_polar(1.0, xi.arg());
    let rhs = &a * Complex64::new(r.cosh(), 0.0) - a.adjoint() * (phase * r.sinh());
    Ok(interior_max_diff(&lhs, &rhs))
}

/// Interior-block deviation of `D† a D` from `a + α`.
pub fn displacement_residual(alpha: Complex64, dim: usize) -> Result<f64> {
    let d = displacement_matrix(alpha, dim)?.entries;
    let a = annihilation(dim).entries;
    let lhs = d.adjoint() * &a * &d;
    let rhs = &a + DMatrix::<Complex64>::identity(dim, dim) * alpha;
    Ok(interior_max_diff(&lhs, &rhs))
}

/// Diagonal of `D(α) S(ξ) ρ_th S(ξ)† D(α)†` for a Gaussian-family spec,
/// built from dense operators. The thermal core is truncated to `dim` levels
/// and renormalized first. Returns all `dim` entries; only roughly the lower
/// half is trustworthy.
pub fn gaussian_state_diag(spec: &StateSpec, dim: usize) -> Result<Vec<f64>> {
    match spec.family {
        Family::Thermal
        | Family::Coherent
        | Family::SqueezedVacuum
        | Family::SqueezedCoherent
        | Family::GeneralGaussian => {}
        _ => {
            return Err(Error::InvalidParameter {
                name: "family",
                value: f64::NAN,
                reason: "the Gaussian oracle only accepts Gaussian families",
            })
        }
    }
    spec.validate()?;
    let alpha = Complex64::from_polar(spec.alpha_mag, spec.alpha_phase);
    let xi = Complex64::from_polar(spec.r, spec.chi);
    check_dim(dim, spec.n_th + alpha.norm_sqr() + spec.r.sinh().powi(2))?;

    let mut weights = vec![0.0; dim];
    if spec.n_th == 0.0 {
        weights[0] = 1.0;
    } else {
        let ratio = spec.n_th / (spec.n_th + 1.0);
        let mut w = 1.0;
        for slot in weights.iter_mut() {
            *slot = w;
            w *= ratio;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }

    let u = displacement_matrix(alpha, dim)?.entries * squeeze_matrix(xi, dim)?.entries;
    let support = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    Ok((0..dim)
        .map(|n| {
            (0..=support)
                .map(|k| weights[k] * u[(n, k)].norm_sqr())
                .sum()
        })
        .collect())
}

/// Diagonal of `S(r)|m>`.
pub fn squeezed_number_diag(m: usize, r: f64, dim: usize) -> Result<Vec<f64>> {
    check_dim(dim, m as f64 * (2.0 * r).cosh() + r.sinh().powi(2))?;
    if m >= dim {
        return Err(Error::DimensionTooSmall { dim, required: m + 1 });
    }
    let s = squeeze_matrix(Complex64::new(r, 0.0), dim)?;
    Ok(s.column(m).iter().map(|z| z.norm_sqr()).collect())
}

/// Diagonal of the normalized cat state `|α> + e^{iδ}|-α>`, with the coherent
/// states taken from columns of the displacement matrix.
pub fn cat_diag(alpha_mag: f64, delta: f64, dim: usize) -> Result<Vec<f64>> {
    let d = displacement_matrix(Complex64::new(alpha_mag, 0.0), dim)?;
    let minus = d.adjoint();
    let phase = Complex64::from_polar(1.0, delta);
    let psi: Vec<Complex64> = (0..dim)
        .map(|n| d.entries[(n, 0)] + phase * minus.entries[(n, 0)])
        .collect();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha_mag",
            value: alpha_mag,
            reason: "cat superposition vanishes",
        });
    }
    Ok(psi.iter().map(|z| z.norm_sqr() / norm).collect())
}
