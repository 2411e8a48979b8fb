//! Beamspace model of an electronically steerable parasitic array radiator.
//!
//! One active element sits at the array centre and `M − 1` parasitic elements
//! surround it. Reactive loads on the parasitics set the element currents
//! `i = v_s (Y⁻¹ + X)⁻¹ u`, the far-field pattern is `P(θ) = iᵀ a(θ)`, and
//! Gram–Schmidt on the steering functions `a_m(θ)` yields `M` orthonormal
//! basis patterns `Φ_l` with `P(θ) = Σ_l w_l Φ_l(θ)`, `w_l = iᵀ q_l`.
//!
//! Inner products are `⟨f, g⟩ = (1/2π)∫ f ḡ dθ`, evaluated with the
//! trapezoidal rule on a uniform periodic grid.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{two_pi, Scalar};

/// Loads with a one-norm condition estimate above this are degenerate.
pub const MAX_LOAD_CONDITION: f64 = 1e12;

/// Resistive load of the fed element, in ohms.
pub const ACTIVE_LOAD_OHMS: f64 = 50.0;

/// Default parasitic ring radius, in wavelengths (λ/16).
pub const DEFAULT_RADIUS: f64 = 1.0 / 16.0;

/// Polar position of an element in wavelengths and radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementPosition<T> {
    pub radius: T,
    pub angle: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsparConfig<T> {
    pub m_elements: usize,
    /// Symmetric `M × M` mutual admittance matrix `Y`, row-major rows.
    pub admittance: Vec<Vec<Complex<T>>>,
    pub feed_voltage: Complex<T>,
    /// Element 0 is the active element.
    pub positions: Vec<ElementPosition<T>>,
}

impl<T: Scalar> EsparConfig<T> {
    /// Active element at the centre, `M − 1` parasitics evenly spaced on a
    /// ring of the given radius.
    pub fn circular(
        m_elements: usize,
        radius: T,
        admittance: Vec<Vec<Complex<T>>>,
        feed_voltage: Complex<T>,
    ) -> Result<Self> {
        let positions = circular_positions(m_elements, radius);
        Self {
            m_elements,
            admittance,
            feed_voltage,
            positions,
        }
        .validated()
    }

    /// Circular array with the bundled synthetic admittance matrix and unit feed.
    pub fn with_synthetic_admittance(m_elements: usize) -> Result<Self> {
        Self::circular(
            m_elements,
            T::lit(DEFAULT_RADIUS),
            synthetic_admittance(m_elements),
            Complex::new(T::one(), T::zero()),
        )
    }

    pub fn validated(self) -> Result<Self> {
        let m = self.m_elements;
        if m == 0 {
            return Err(Error::invalid("m_elements", "must be >= 1"));
        }
        if self.admittance.len() != m {
            return Err(Error::DimensionMismatch {
                what: "admittance rows",
                expected: m,
                found: self.admittance.len(),
            });
        }
        for row in &self.admittance {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    what: "admittance columns",
                    expected: m,
                    found: row.len(),
                });
            }
        }
        let scale = self
            .admittance
            .iter()
            .flatten()
            .fold(T::zero(), |acc, y| acc.max(y.norm()));
        for i in 0..m {
            for j in 0..i {
                let diff = (self.admittance[i][j] - self.admittance[j][i]).norm();
                if diff > T::lit(1e-12) * scale {
                    return Err(Error::invalid(
                        "admittance",
                        format!("not symmetric at ({i}, {j})"),
                    ));
                }
            }
        }
        if self.positions.len() != m {
            return Err(Error::DimensionMismatch {
                what: "element positions",
                expected: m,
                found: self.positions.len(),
            });
        }
        if m > 1 && !self.positions.iter().skip(1).all(|p| p.radius > T::zero()) {
            return Err(Error::invalid("radius", "parasitic elements need radius > 0"));
        }
        Ok(self)
    }

    /// Steering vector entries `a_m(θ) = exp(j·2π·r_m·cos(θ − ψ_m))`.
    pub fn steering_vector(&self, theta: T) -> Vec<Complex<T>> {
        self.positions
            .iter()
            .map(|p| steering_entry(p, theta))
            .collect()
    }
}

#[inline]
fn steering_entry<T: Scalar>(p: &ElementPosition<T>, theta: T) -> Complex<T> {
    Complex::from_polar(T::one(), two_pi::<T>() * p.radius * (theta - p.angle).cos())
}

pub fn circular_positions<T: Scalar>(m_elements: usize, radius: T) -> Vec<ElementPosition<T>> {
    let mut positions = Vec::with_capacity(m_elements);
    if m_elements == 0 {
        return positions;
    }
    positions.push(ElementPosition {
        radius: T::zero(),
        angle: T::zero(),
    });
    let parasitic = m_elements - 1;
    for k in 0..parasitic {
        positions.push(ElementPosition {
            radius,
            angle: two_pi::<T>() * T::from_usize(k).unwrap() / T::from_usize(parasitic).unwrap(),
        });
    }
    positions
}

/// A diagonally dominant symmetric admittance matrix (siemens) whose mutual
/// terms decay with element index distance. Stand-in for a measured `Y`.
pub fn synthetic_admittance<T: Scalar>(m_elements: usize) -> Vec<Vec<Complex<T>>> {
    let own = Complex::new(T::lit(0.020), T::lit(-0.008));
    let mutual = Complex::new(T::lit(0.004), T::lit(0.003));
    (0..m_elements)
        .map(|i| {
            (0..m_elements)
                .map(|j| {
                    if i == j {
                        own
                    } else {
                        let d = T::from_usize(i.abs_diff(j)).unwrap();
                        mutual * (-T::lit(0.5) * d).exp()
                    }
                })
                .collect()
        })
        .collect()
}

/// Element currents `i = v_s (Y⁻¹ + X)⁻¹ u` with `X = diag(50, jx₁, …, jx_{M−1})`.
pub fn element_currents<T: Scalar>(cfg: &EsparConfig<T>, reactances: &[T]) -> Result<Vec<Complex<T>>> {
    let m = cfg.m_elements;
    if reactances.len() + 1 != m {
        return Err(Error::DimensionMismatch {
            what: "reactances",
            expected: m - 1,
            found: reactances.len(),
        });
    }
    let degenerate = |condition: T| Error::DegenerateLoad {
        condition: condition.as_f64(),
        limit: MAX_LOAD_CONDITION,
    };
    let y = CMatrix::from_rows(&cfg.admittance).ok_or(Error::DimensionMismatch {
        what: "admittance",
        expected: m,
        found: cfg.admittance.len(),
    })?;
    let y_inv = y.inverse().ok_or_else(|| degenerate(T::infinity()))?;
    let mut a = y_inv;
    a.set(0, 0, a.get(0, 0) + Complex::new(T::lit(ACTIVE_LOAD_OHMS), T::zero()));
    for (k, &x) in reactances.iter().enumerate() {
        a.set(k + 1, k + 1, a.get(k + 1, k + 1) + Complex::new(T::zero(), x));
    }
    let a_inv = a.inverse().ok_or_else(|| degenerate(T::infinity()))?;
    let condition = a.norm_1() * a_inv.norm_1();
    if !(condition <= T::lit(MAX_LOAD_CONDITION)) {
        return Err(degenerate(condition));
    }
    Ok((0..m).map(|r| a_inv.get(r, 0) * cfg.feed_voltage).collect())
}

/// Orthonormal basis patterns sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet<T> {
    pub theta_grid: Vec<T>,
    /// `basis_values[l][k] = Φ_l(θ_k)`.
    pub basis_values: Vec<Vec<Complex<T>>>,
    /// `projections[l][m] = ⟨a_m, Φ_l⟩`, i.e. the vector `q_l`.
    pub projections: Vec<Vec<Complex<T>>>,
    /// `Φ_l(θ) = Σ_m coefficients[l][m]·a_m(θ)`, for evaluation off the grid.
    pub coefficients: Vec<Vec<Complex<T>>>,
    positions: Vec<ElementPosition<T>>,
}

fn inner<T: Scalar>(f: &[Complex<T>], g: &[Complex<T>]) -> Complex<T> {
    let sum = f
        .iter()
        .zip(g)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj());
    sum / T::from_usize(f.len()).unwrap()
}

/// Gram–Schmidt over the steering functions on a `grid_size`-point grid.
pub fn build_basis<T: Scalar>(cfg: &EsparConfig<T>, grid_size: usize) -> Result<BasisSet<T>> {
    let m = cfg.m_elements;
    if grid_size < 4 * m {
        return Err(Error::invalid(
            "grid_size",
            format!("need at least 4M = {} points, got {grid_size}", 4 * m),
        ));
    }
    let step = two_pi::<T>() / T::from_usize(grid_size).unwrap();
    let theta_grid: Vec<T> = (0..grid_size).map(|k| T::from_usize(k).unwrap() * step).collect();
    let steering: Vec<Vec<Complex<T>>> = cfg
        .positions
        .iter()
        .map(|p| theta_grid.iter().map(|&t| steering_entry(p, t)).collect())
        .collect();

    let zero = Complex::new(T::zero(), T::zero());
    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    let mut coefficients: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    for (l, a_l) in steering.iter().enumerate() {
        let mut v = a_l.clone();
        let mut c = vec![zero; m];
        c[l] = Complex::new(T::one(), T::zero());
        // Two modified Gram–Schmidt passes keep orthogonality at round-off level.
        for _ in 0..2 {
            for (phi, coef) in basis.iter().zip(&coefficients) {
                let proj = inner(&v, phi);
                for (vk, pk) in v.iter_mut().zip(phi) {
                    *vk = *vk - proj * pk;
                }
                for (ck, qk) in c.iter_mut().zip(coef) {
                    *ck = *ck - proj * qk;
                }
            }
        }
        let norm = inner(&v, &v).re.sqrt();
        let a_norm = inner(a_l, a_l).re.sqrt();
        if !(norm > T::lit(1e-10) * a_norm) {
            return Err(Error::RankDeficient { element: l });
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
        coefficients.push(c.into_iter().map(|x| x / norm).collect());
    }

    let projections = basis
        .iter()
        .map(|phi| steering.iter().map(|a_m| inner(a_m, phi)).collect())
        .collect();

    Ok(BasisSet {
        theta_grid,
        basis_values: basis,
        projections,
        coefficients,
        positions: cfg.positions.clone(),
    })
}

impl<T: Scalar> BasisSet<T> {
    pub fn len(&self) -> usize {
        self.basis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis_values.is_empty()
    }

    /// `Φ_l(θ)` at any angle.
    pub fn basis_at(&self, l: usize, theta: T) -> Complex<T> {
        self.coefficients[l]
            .iter()
            .zip(&self.positions)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (c, p)| {
                acc + c * steering_entry(p, theta)
            })
    }

    /// `Σ_l w_l Φ_l(θ)`.
    pub fn expand(&self, weights: &[Complex<T>], theta: T) -> Complex<T> {
        weights
            .iter()
            .enumerate()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (l, w)| {
                acc + w * self.basis_at(l, theta)
            })
    }

    /// Gram matrix `⟨Φ_i, Φ_j⟩` under the grid quadrature.
    pub fn gram(&self) -> Vec<Vec<Complex<T>>> {
        self.basis_values
            .iter()
            .map(|fi| self.basis_values.iter().map(|fj| inner(fi, fj)).collect())
            .collect()
    }

    /// `max |⟨Φ_i, Φ_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for (i, row) in self.gram().iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    /// Largest off-diagonal `|⟨Φ_i, Φ_j⟩|`.
    pub fn max_off_diagonal(&self) -> T {
        let mut worst = T::zero();
        for (i, row) in self.gram().iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                if i != j {
                    worst = worst.max(g.norm());
                }
            }
        }
        worst
    }

    /// `max_{m,k} |a_m(θ_k) − Σ_l q_l[m] Φ_l(θ_k)|`.
    pub fn reconstruction_residual(&self) -> T {
        let mut worst = T::zero();
        for (m, p) in self.positions.iter().enumerate() {
            for (k, &theta) in self.theta_grid.iter().enumerate() {
                let rebuilt = self
                    .projections
                    .iter()
                    .zip(&self.basis_values)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (q, phi)| acc + q[m] * phi[k]);
                worst = worst.max((steering_entry(p, theta) - rebuilt).norm());
            }
        }
        worst
    }

    /// Squared pattern norm `⟨P, P⟩` on the grid.
    pub fn pattern_energy(&self, currents: &[Complex<T>]) -> T {
        let values: Vec<Complex<T>> = self
            .theta_grid
            .iter()
            .map(|&t| pattern_at(currents, &self.positions, t))
            .collect();
        inner(&values, &values).re
    }
}

/// Basis weights `w_l = iᵀ q_l`.
pub fn pattern_weights<T: Scalar>(currents: &[Complex<T>], basis: &BasisSet<T>) -> Result<Vec<Complex<T>>> {
    if currents.len() != basis.positions.len() {
        return Err(Error::DimensionMismatch {
            what: "currents",
            expected: basis.positions.len(),
            found: currents.len(),
        });
    }
    Ok(basis
        .projections
        .iter()
        .map(|q| {
            currents
                .iter()
                .zip(q)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (i, qm)| acc + i * qm)
        })
        .collect())
}

fn pattern_at<T: Scalar>(currents: &[Complex<T>], positions: &[ElementPosition<T>], theta: T) -> Complex<T> {
    currents
        .iter()
        .zip(positions)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (i, p)| acc + i * steering_entry(p, theta))
}

/// Radiation pattern `P(θ) = iᵀ a(θ)`.
pub fn pattern_value<T: Scalar>(currents: &[Complex<T>], cfg: &EsparConfig<T>, theta: T) -> Complex<T> {
    pattern_at(currents, &cfg.positions, theta)
}
