//! Construction of the fully predetermined localized network: the univariate
//! neuron coefficients, the weight matrix and direction vectors, per-neuron
//! affine parameters, the cube partition of [-a,a]^d, the bandwidth rule, and
//! the per-cube feature map.
//!
//! Everything here is decided before any data are seen; estimation only
//! chooses the d_q output coefficients of each cube.

use crate::activation::{ActivationKind, ActivationSpec};
use crate::basis::{
    expansion_matrix, multi_indices, rotation_matrix, scaling_diag, MultiIndexSet,
    RotationPair,
};
use crate::binary::LinkKind;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// How the cube side length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum Bandwidth {
    /// `h1 = 2.5 T^{-1/(d+2p-0.5)}`, `M` the closest integer to `a/h1`.
    Rule,
    /// Requested side half-length; coerced to the nearest exact `a/M`.
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMatrix {
    Default,
    /// User-chosen (d+1) x d_q matrix, stored row-major.
    User { rows: usize, cols: usize, data: Vec<f64> },
}

/// User-facing hyperparameters. The scale constant of the univariate
/// construction is fixed to 1 throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LnnConfig {
    /// Domain half-width: the estimator lives on [-a,a]^d.
    pub a: f64,
    /// Regressor dimension.
    pub d: usize,
    /// Polynomial degree reproduced by each cube.
    pub q: u32,
    /// Hölder exponent in (0,1]; the smoothness order is p = q + s.
    pub s: f64,
    /// Expansion point of the activation.
    pub u_sigma: f64,
    pub activation: ActivationKind,
    pub bandwidth: Bandwidth,
    pub weights: WeightMatrix,
    /// Latent-error link, used by the binary-outcome model only.
    pub link: LinkKind,
}

impl LnnConfig {
    /// Smoothness order entering the bandwidth rule.
    pub fn p(&self) -> f64 {
        self.q as f64 + self.s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::InvalidArgument(format!("a = {} must be positive", self.a)));
        }
        if self.q == 0 {
            return Err(Error::InvalidArgument("q must be at least 1".into()));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::InvalidArgument(format!("s = {} outside (0, 1]", self.s)));
        }
        if let Bandwidth::Explicit(h) = self.bandwidth {
            if !(h > 0.0) {
                return Err(Error::InvalidArgument(format!("explicit bandwidth {h} must be positive")));
            }
        }
        Ok(())
    }
}

impl Default for LnnConfig {
    fn default() -> Self {
        Self {
            a: 3.0,
            d: 1,
            q: 3,
            s: 1.0,
            u_sigma: -0.5,
            activation: ActivationKind::SigmoidalSquasher,
            bandwidth: Bandwidth::Rule,
            weights: WeightMatrix::Default,
            link: LinkKind::Probit,
        }
    }
}

/// Output and slope coefficients of the q+1 neurons reproducing a degree-q
/// power: `gamma_k = (-1)^{q+k-1} binom(q, k-1) / sigma^{(q)}(u_sigma)` and
/// `beta_k = k - 1`, with the scale constant fixed to 1.
pub fn univariate_coeffs(q: u32, activation: &ActivationSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let dq_sigma = activation.derivative(activation.u_sigma, q)?;
    if dq_sigma.abs() <= crate::activation::DERIVATIVE_TOLERANCE {
        return Err(Error::InvalidExpansionPoint {
            u_sigma: activation.u_sigma,
            orders: vec![q],
        });
    }
    let mut gamma = Vec::with_capacity(q as usize + 1);
    let mut beta = Vec::with_capacity(q as usize + 1);
    let mut binom = 1.0; // binom(q, k-1), updated multiplicatively
    for k in 1..=(q + 1) {
        if k > 1 {
            binom = binom * (q + 2 - k) as f64 / (k - 1) as f64;
        }
        let sign = if (q + k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        gamma.push(sign * binom / dq_sigma);
        beta.push((k - 1) as f64);
    }
    Ok((gamma, beta))
}

/// Default weight matrix: column j is `(sqrt(d+1)/q)` times the exponent
/// vector of the j-th distinct term in the expansion of `(1+x_1+...+x_d)^q`,
/// aligned with the multi-index ordering via `r_0 = q - |n_j|`.
pub fn default_weight_matrix(d: usize, q: u32, idx: &MultiIndexSet) -> Result<DMatrix<f64>> {
    if q == 0 {
        return Err(Error::InvalidArgument("default weights require q >= 1".into()));
    }
    let dq = idx.len();
    let scale = ((d + 1) as f64).sqrt() / q as f64;
    let mut w = DMatrix::zeros(d + 1, dq);
    for (j, tuple) in idx.iter().enumerate() {
        let total: u32 = tuple.iter().sum();
        w[(0, j)] = scale * (q - total) as f64;
        for (k, &power) in tuple.iter().enumerate() {
            w[(k + 1, j)] = scale * power as f64;
        }
    }
    Ok(w)
}

fn validate_weight_matrix(w: &DMatrix<f64>, d: usize, dq: usize) -> Result<()> {
    if w.nrows() != d + 1 || w.ncols() != dq {
        return Err(Error::InvalidArgument(format!(
            "weight matrix must be {}x{}, got {}x{}",
            d + 1,
            dq,
            w.nrows(),
            w.ncols()
        )));
    }
    let limit = ((d + 1) as f64).sqrt() + 1e-9;
    for j in 0..dq {
        if w.column(j).norm() > limit {
            return Err(Error::InvalidArgument(format!(
                "weight column {j} has norm {} exceeding sqrt(d+1)",
                w.column(j).norm()
            )));
        }
        for k in (j + 1)..dq {
            if w.column(j) == w.column(k) {
                return Err(Error::InvalidArgument(format!(
                    "weight columns {j} and {k} coincide"
                )));
            }
        }
    }
    Ok(())
}

/// Direction vectors `alpha_j = diag(h, I_d) w_j / (d+1)`; they guarantee
/// `|(1, (x-x0)^T) alpha_j| <= h` over the cube.
pub fn direction_vectors(w: &DMatrix<f64>, h: f64) -> Vec<DVector<f64>> {
    let d = w.nrows() - 1;
    let scale = 1.0 / (d + 1) as f64;
    (0..w.ncols())
        .map(|j| {
            let mut alpha = DVector::zeros(d + 1);
            alpha[0] = h * w[(0, j)] * scale;
            for k in 0..d {
                alpha[k + 1] = w[(k + 1, j)] * scale;
            }
            alpha
        })
        .collect()
}

/// Per-neuron affine parameters: neuron (j,k) sits at position (j)(q+1)+k and
/// carries `beta_k alpha_j + (u_sigma, 0_d)`.
pub fn neuron_affine_params(
    alphas: &[DVector<f64>],
    beta: &[f64],
    u_sigma: f64,
) -> Vec<DVector<f64>> {
    let mut pis = Vec::with_capacity(alphas.len() * beta.len());
    for alpha in alphas {
        for &b in beta {
            let mut pi = alpha * b;
            pi[0] += u_sigma;
            pis.push(pi);
        }
    }
    pis
}

/// Axis-aligned tiling of [-a,a]^d into M^d cubes of half-width h = a/M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub a: f64,
    pub d: usize,
    pub m: usize,
    pub h: f64,
}

impl Partition {
    pub fn new(a: f64, m: usize, d: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("partition requires M >= 1".into()));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidArgument("partition requires a > 0".into()));
        }
        Ok(Self { a, d, m, h: a / m as f64 })
    }

    pub fn n_cubes(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Center of the cube at the given flat (row-major) index.
    pub fn center(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        let mut rem = flat;
        for k in (0..self.d).rev() {
            let digit = rem % self.m;
            rem /= self.m;
            out[k] = -self.a + self.h * (2 * digit + 1) as f64;
        }
        out
    }

    pub fn centers(&self) -> Vec<Vec<f64>> {
        (0..self.n_cubes()).map(|i| self.center(i)).collect()
    }

    /// Flat cube index for an in-domain point; `None` outside [-a,a]^d.
    /// Shared faces resolve to the higher bin; the upper boundary clamps in.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        debug_assert_eq!(x.len(), self.d);
        let mut flat = 0usize;
        for &xi in x {
            if !(-self.a..=self.a).contains(&xi) || xi.is_nan() {
                return None;
            }
            let bin = (((xi + self.a) / (2.0 * self.h)) as usize).min(self.m - 1);
            flat = flat * self.m + bin;
        }
        Some(flat)
    }
}

/// Bandwidth rule `h1 = 2.5 T^{-1/(d+2p-0.5)}`; M is the closest integer to
/// `a/h1` (ties round up), floored at 1; h = a/M.
pub fn bandwidth_rule(t: usize, d: usize, p: f64, a: f64) -> Result<(f64, usize)> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("bandwidth rule requires T >= 2, got {t}")));
    }
    let exponent = -1.0 / (d as f64 + 2.0 * p - 0.5);
    let h1 = 2.5 * (t as f64).powf(exponent);
    let m = ((a / h1 + 0.5).floor() as usize).max(1);
    Ok((a / m as f64, m))
}

/// The fully determined network. Immutable after construction; only the d_q
/// coefficients per cube remain for estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    config: LnnConfig,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    w: DMatrix<f64>,
    alphas: Vec<DVector<f64>>,
    pis: Vec<DVector<f64>>,
    partition: Partition,
    idx: MultiIndexSet,
    rotation: RotationPair,
    h_diag: Vec<f64>,
}

impl Architecture {
    /// Build the network. `sample_size` feeds the bandwidth rule and may be
    /// omitted when the config carries an explicit bandwidth.
    pub fn build(config: &LnnConfig, sample_size: Option<usize>) -> Result<Self> {
        config.validate()?;
        let activation = ActivationSpec::new(config.activation, config.u_sigma, config.q)?;
        let (gamma, beta) = univariate_coeffs(config.q, &activation)?;
        let idx = multi_indices(config.d, config.q)?;
        let w = match &config.weights {
            WeightMatrix::Default => default_weight_matrix(config.d, config.q, &idx)?,
            WeightMatrix::User { rows, cols, data } => {
                if rows * cols != data.len() {
                    return Err(Error::InvalidArgument("weight matrix shape mismatch".into()));
                }
                let w = DMatrix::from_row_slice(*rows, *cols, data);
                validate_weight_matrix(&w, config.d, idx.len())?;
                w
            }
        };
        let m = match config.bandwidth {
            Bandwidth::Rule => {
                let t = sample_size.ok_or_else(|| {
                    Error::InvalidArgument("bandwidth rule requires the sample size".into())
                })?;
                bandwidth_rule(t, config.d, config.p(), config.a)?.1
            }
            Bandwidth::Explicit(h_req) => ((config.a / h_req + 0.5).floor() as usize).max(1),
        };
        let partition = Partition::new(config.a, m, config.d)?;
        Self::assemble(config.clone(), gamma, beta, w, partition, idx)
    }

    fn assemble(
        config: LnnConfig,
        gamma: Vec<f64>,
        beta: Vec<f64>,
        w: DMatrix<f64>,
        partition: Partition,
        idx: MultiIndexSet,
    ) -> Result<Self> {
        let alphas = direction_vectors(&w, partition.h);
        let pis = neuron_affine_params(&alphas, &beta, config.u_sigma);
        let b = expansion_matrix(&alphas, config.q, &idx)?;
        let rotation = rotation_matrix(b)?;
        let h_diag = scaling_diag(partition.h, &idx);
        Ok(Self {
            config,
            gamma,
            beta,
            w,
            alphas,
            pis,
            partition,
            idx,
            rotation,
            h_diag,
        })
    }

    pub fn config(&self) -> &LnnConfig {
        &self.config
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn weight_matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn alphas(&self) -> &[DVector<f64>] {
        &self.alphas
    }

    pub fn pis(&self) -> &[DVector<f64>] {
        &self.pis
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn h(&self) -> f64 {
        self.partition.h
    }

    pub fn m(&self) -> usize {
        self.partition.m
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.idx
    }

    pub fn rotation(&self) -> &RotationPair {
        &self.rotation
    }

    /// Diagonal of the scaling matrix H.
    pub fn scaling(&self) -> &[f64] {
        &self.h_diag
    }

    /// Coefficients per cube, binom(d+q, d).
    pub fn dq(&self) -> usize {
        self.idx.len()
    }

    /// Total neuron count `M^d d_q (q+1)`.
    pub fn neuron_count(&self) -> usize {
        self.partition.n_cubes() * self.dq() * (self.config.q as usize + 1)
    }

    /// Feature map of the cube with the given center: component j is
    /// `sum_k gamma_k sigma(beta_k (1, (x-x0)^T) alpha_j + u_sigma)`.
    pub fn feature_vector(&self, x: &[f64], cube_center: &[f64]) -> DVector<f64> {
        let kind = self.config.activation;
        let u = self.config.u_sigma;
        let mut out = DVector::zeros(self.dq());
        for (j, alpha) in self.alphas.iter().enumerate() {
            let mut t = alpha[0];
            for k in 0..self.config.d {
                t += alpha[k + 1] * (x[k] - cube_center[k]);
            }
            let mut acc = 0.0;
            for (gk, bk) in self.gamma.iter().zip(&self.beta) {
                acc += gk * kind.value(bk * t + u);
            }
            out[j] = acc;
        }
        out
    }

    /// Feature map of the cube containing `x`, with its flat index.
    pub fn features_at(&self, x: &[f64]) -> Option<(usize, DVector<f64>)> {
        let cube = self.partition.locate(x)?;
        let center = self.partition.center(cube);
        Some((cube, self.feature_vector(x, &center)))
    }
}

/// Versioned on-disk form of an [`Architecture`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureDoc {
    pub version: u32,
    pub index_ordering: String,
    pub config: LnnConfig,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    /// Row-major (d+1) x d_q weight matrix.
    pub w: Vec<f64>,
    pub m: usize,
    pub h: f64,
    /// Row-major d_q x d_q rotation matrix, stored for inspection.
    pub d_rotation: Vec<f64>,
}

pub const ARCHITECTURE_DOC_VERSION: u32 = 1;
pub const INDEX_ORDERING_TAG: &str = "graded-lex";

impl Architecture {
    pub fn to_doc(&self) -> ArchitectureDoc {
        ArchitectureDoc {
            version: ARCHITECTURE_DOC_VERSION,
            index_ordering: INDEX_ORDERING_TAG.to_string(),
            config: self.config.clone(),
            gamma: self.gamma.clone(),
            beta: self.beta.clone(),
            w: self.w.transpose().as_slice().to_vec(),
            m: self.partition.m,
            h: self.partition.h,
            d_rotation: self.rotation.d.transpose().as_slice().to_vec(),
        }
    }

    pub fn from_doc(doc: &ArchitectureDoc) -> Result<Self> {
        if doc.version != ARCHITECTURE_DOC_VERSION {
            return Err(Error::Data(format!(
                "unsupported architecture document version {}",
                doc.version
            )));
        }
        if doc.index_ordering != INDEX_ORDERING_TAG {
            return Err(Error::Data(format!(
                "unknown index ordering tag {:?}",
                doc.index_ordering
            )));
        }
        let config = doc.config.clone();
        config.validate()?;
        let idx = multi_indices(config.d, config.q)?;
        let w = DMatrix::from_row_slice(config.d + 1, idx.len(), &doc.w);
        validate_weight_matrix(&w, config.d, idx.len())?;
        let partition = Partition::new(config.a, doc.m, config.d)?;
        Self::assemble(config, doc.gamma.clone(), doc.beta.clone(), w, partition, idx)
    }
}
