//! Block-structured state space of the oscillatory system
//!
//! ```text
//! q_j'' + w_j^2 q_j = -grad_j U(q),   j = 0..=l,
//! ```
//!
//! with `w_0 = 0` (the slow block) and `w_j >= 1/eps` for the fast blocks.
//! Positions and momenta are stored as flat vectors partitioned into blocks
//! whose sizes are fixed by a [`FrequencySystem`].

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
    #[error("block {block} has dimension {got}, expected {expected}")]
    BlockDim { block: usize, expected: usize, got: usize },
    #[error("omega_0 must be exactly 0, got {0}")]
    NonZeroSlowFrequency(f64),
    #[error("omega_{block} = {omega} is below 1/epsilon = {bound}")]
    FrequencyBelowScale { block: usize, omega: f64, bound: f64 },
    #[error("invalid frequency or scale: {0}")]
    InvalidValue(String),
}

/// Raised by a [`Potential`] when it is evaluated outside its admissible region.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("potential evaluated outside its admissible region: component {component} = {value}")]
pub struct PotentialDomainError {
    pub component: usize,
    pub value: f64,
}

/// Offsets of each block inside a flat coordinate vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(block_dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(block_dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in block_dims {
            acc += d;
            offsets.push(acc);
        }
        BlockLayout { offsets }
    }

    pub fn num_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn block_dim(&self, block: usize) -> usize {
        self.offsets[block + 1] - self.offsets[block]
    }

    /// Block index owning flat component `i`.
    pub fn block_of(&self, i: usize) -> usize {
        debug_assert!(i < self.len());
        self.offsets[1..].partition_point(|&end| end <= i)
    }
}

/// Block structure and constant frequencies `(w_0 = 0, w_1, ..., w_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySystem {
    block_dims: Vec<usize>,
    omegas: Vec<f64>,
    epsilon: f64,
    layout: Arc<BlockLayout>,
}

impl FrequencySystem {
    /// Builds a system with `epsilon = 1 / min_{j>=1} w_j` (or 1 when there
    /// are no fast blocks).
    pub fn new(block_dims: Vec<usize>, omegas: Vec<f64>) -> Result<Self, ModelError> {
        let min_fast = omegas.iter().skip(1).copied().fold(f64::INFINITY, f64::min);
        let epsilon = if min_fast.is_finite() && min_fast > 0.0 { 1.0 / min_fast } else { 1.0 };
        Self::with_epsilon(block_dims, omegas, epsilon)
    }

    pub fn with_epsilon(block_dims: Vec<usize>, omegas: Vec<f64>, epsilon: f64) -> Result<Self, ModelError> {
        if block_dims.is_empty() || block_dims.len() != omegas.len() {
            return Err(ModelError::BlockCount { expected: block_dims.len(), got: omegas.len() });
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ModelError::InvalidValue(format!("epsilon = {epsilon}")));
        }
        if omegas[0] != 0.0 {
            return Err(ModelError::NonZeroSlowFrequency(omegas[0]));
        }
        let bound = 1.0 / epsilon;
        for (j, &w) in omegas.iter().enumerate().skip(1) {
            if !w.is_finite() {
                return Err(ModelError::InvalidValue(format!("omega_{j} = {w}")));
            }
            // relative slack so that epsilon = 1/w round-trips
            if w < bound * (1.0 - 4.0 * f64::EPSILON) {
                return Err(ModelError::FrequencyBelowScale { block: j, omega: w, bound });
            }
        }
        for (j, &d) in block_dims.iter().enumerate().skip(1) {
            if d == 0 {
                return Err(ModelError::BlockDim { block: j, expected: 1, got: 0 });
            }
        }
        let layout = Arc::new(BlockLayout::new(&block_dims));
        Ok(FrequencySystem { block_dims, omegas, epsilon, layout })
    }

    /// Number of fast blocks `l`.
    pub fn num_fast(&self) -> usize {
        self.omegas.len() - 1
    }

    pub fn num_blocks(&self) -> usize {
        self.omegas.len()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// The fast frequencies `(w_1, ..., w_l)`.
    pub fn fast_omegas(&self) -> &[f64] {
        &self.omegas[1..]
    }

    pub fn omega(&self, block: usize) -> f64 {
        self.omegas[block]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    /// Total number of scalar coordinates.
    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    /// Same blocks, different frequencies (used for modified frequencies).
    pub fn with_omegas(&self, omegas: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(self.block_dims.clone(), omegas)
    }

    /// Frequency of every flat component, expanded from the block frequencies.
    pub fn component_omegas(&self) -> Vec<f64> {
        self.expand(|j| self.omegas[j])
    }

    /// Evaluates `f(block)` once per block and spreads it over the block's components.
    pub fn expand<F: FnMut(usize) -> f64>(&self, mut f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.num_blocks() {
            let v = f(j);
            out.extend(std::iter::repeat_n(v, self.block_dims[j]));
        }
        out
    }

    pub fn conforms(&self, v: &BlockVector) -> bool {
        *v.layout == *self.layout
    }
}

/// Flat coordinate vector partitioned into blocks `(x_0, x_1, ..., x_l)`.
#[derive(Clone, PartialEq)]
pub struct BlockVector {
    data: Vec<f64>,
    layout: Arc<BlockLayout>,
}

impl fmt::Debug for BlockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<&[f64]> = (0..self.num_blocks()).map(|j| self.block(j)).collect();
        f.debug_tuple("BlockVector").field(&blocks).finish()
    }
}

impl BlockVector {
    pub fn zeros(freq: &FrequencySystem) -> Self {
        BlockVector { data: vec![0.0; freq.dim()], layout: freq.layout.clone() }
    }

    pub fn from_blocks(freq: &FrequencySystem, blocks: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if blocks.len() != freq.num_blocks() {
            return Err(ModelError::BlockCount { expected: freq.num_blocks(), got: blocks.len() });
        }
        let mut data = Vec::with_capacity(freq.dim());
        for (j, b) in blocks.into_iter().enumerate() {
            if b.len() != freq.block_dims[j] {
                return Err(ModelError::BlockDim { block: j, expected: freq.block_dims[j], got: b.len() });
            }
            data.extend(b);
        }
        Ok(BlockVector { data, layout: freq.layout.clone() })
    }

    pub fn from_flat(freq: &FrequencySystem, data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != freq.dim() {
            return Err(ModelError::BlockDim { block: 0, expected: freq.dim(), got: data.len() });
        }
        Ok(BlockVector { data, layout: freq.layout.clone() })
    }

    pub fn layout(&self) -> &Arc<BlockLayout> {
        &self.layout
    }

    pub fn num_blocks(&self) -> usize {
        self.layout.num_blocks()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.data[self.layout.range(j)]
    }

    pub fn block_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.layout.range(j);
        &mut self.data[r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_layout(&self, other: &BlockVector) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout
    }

    pub fn add(&self, other: &BlockVector) -> BlockVector {
        assert!(self.same_layout(other), "block layouts differ");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        BlockVector { data, layout: self.layout.clone() }
    }

    pub fn sub(&self, other: &BlockVector) -> BlockVector {
        assert!(self.same_layout(other), "block layouts differ");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        BlockVector { data, layout: self.layout.clone() }
    }

    pub fn scale(&self, s: f64) -> BlockVector {
        BlockVector { data: self.data.iter().map(|a| s * a).collect(), layout: self.layout.clone() }
    }

    pub fn dot(&self, other: &BlockVector) -> f64 {
        assert!(self.same_layout(other), "block layouts differ");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Squared Euclidean norm of block `j`.
    pub fn block_norm_sq(&self, j: usize) -> f64 {
        self.block(j).iter().map(|x| x * x).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Smooth coupling potential `U` with closed-form value and gradient.
///
/// The integrators use the force `g(q) = -grad U(q)`.
pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, q: &BlockVector) -> Result<f64, PotentialDomainError>;

    /// Writes `grad U(q)` into `grad`.
    fn gradient_into(&self, q: &BlockVector, grad: &mut BlockVector) -> Result<(), PotentialDomainError>;

    fn gradient(&self, q: &BlockVector) -> Result<BlockVector, PotentialDomainError> {
        let mut g = BlockVector { data: vec![0.0; q.len()], layout: q.layout.clone() };
        self.gradient_into(q, &mut g)?;
        Ok(g)
    }
}

/// Componentwise box `|q_i| <= bound` outside which catalog potentials refuse evaluation.
pub fn check_box(q: &BlockVector, bound: f64) -> Result<(), PotentialDomainError> {
    match q.as_slice().iter().position(|x| !(x.abs() <= bound)) {
        Some(i) => Err(PotentialDomainError { component: i, value: q.as_slice()[i] }),
        None => Ok(()),
    }
}

/// `U = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _q: &BlockVector) -> Result<f64, PotentialDomainError> {
        Ok(0.0)
    }

    fn gradient_into(&self, _q: &BlockVector, grad: &mut BlockVector) -> Result<(), PotentialDomainError> {
        grad.as_mut_slice().fill(0.0);
        Ok(())
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Potential defined by a pair of closures over the flat coordinate vector.
#[derive(Clone)]
pub struct FnPotential {
    name: String,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    bound: f64,
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential").field("name", &self.name).field("bound", &self.bound).finish()
    }
}

impl FnPotential {
    pub fn new<V, G>(name: impl Into<String>, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        FnPotential { name: name.into(), value: Arc::new(value), gradient: Arc::new(gradient), bound: f64::INFINITY }
    }

    /// Restricts evaluation to the box `|q_i| <= bound`.
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Potential for FnPotential {
    fn value(&self, q: &BlockVector) -> Result<f64, PotentialDomainError> {
        check_box(q, self.bound)?;
        Ok((self.value)(q.as_slice()))
    }

    fn gradient_into(&self, q: &BlockVector, grad: &mut BlockVector) -> Result<(), PotentialDomainError> {
        check_box(q, self.bound)?;
        (self.gradient)(q.as_slice(), grad.as_mut_slice());
        Ok(())
    }
}

/// Phase-space point `(t, q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscState {
    pub t: f64,
    pub q: BlockVector,
    pub p: BlockVector,
}

impl OscState {
    pub fn new(t: f64, q: BlockVector, p: BlockVector) -> Result<Self, ModelError> {
        if !q.same_layout(&p) {
            return Err(ModelError::BlockCount { expected: q.num_blocks(), got: p.num_blocks() });
        }
        Ok(OscState { t, q, p })
    }

    pub fn conforms(&self, freq: &FrequencySystem) -> bool {
        freq.conforms(&self.q) && freq.conforms(&self.p)
    }
}

/// Largest componentwise difference between the analytic gradient and a
/// central finite difference with the given step.
pub fn gradient_check(potential: &dyn Potential, point: &BlockVector, step: f64) -> Result<f64, PotentialDomainError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let analytic = potential.gradient(point)?;
    let mut probe = point.clone();
    let mut max_err: f64 = 0.0;
    for i in 0..point.len() {
        let x = point.as_slice()[i];
        probe.as_mut_slice()[i] = x + step;
        let up = potential.value(&probe)?;
        probe.as_mut_slice()[i] = x - step;
        let down = potential.value(&probe)?;
        probe.as_mut_slice()[i] = x;
        let fd = (up - down) / (2.0 * step);
        max_err = max_err.max((analytic.as_slice()[i] - fd).abs());
    }
    Ok(max_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_system() -> FrequencySystem {
        FrequencySystem::new(vec![0, 1], vec![0.0, 100.0]).unwrap()
    }

    #[test]
    fn frequency_system_invariants() {
        let f = FrequencySystem::new(vec![3, 3], vec![0.0, 50.0]).unwrap();
        assert_eq!(f.num_fast(), 1);
        assert_eq!(f.dim(), 6);
        assert!((f.epsilon() - 0.02).abs() < 1e-18);
        assert!(FrequencySystem::new(vec![1, 1], vec![1.0, 50.0]).is_err());
        assert!(FrequencySystem::with_epsilon(vec![1, 1], vec![0.0, 50.0], 0.01).is_err());
        assert!(FrequencySystem::new(vec![1], vec![0.0, 50.0]).is_err());
        assert_eq!(f.component_omegas(), vec![0.0, 0.0, 0.0, 50.0, 50.0, 50.0]);
    }

    #[test]
    fn layout_block_of() {
        let l = BlockLayout::new(&[0, 2, 1]);
        assert_eq!(l.block_of(0), 1);
        assert_eq!(l.block_of(1), 1);
        assert_eq!(l.block_of(2), 2);
        assert_eq!(l.num_blocks(), 3);
    }

    #[test]
    fn block_vector_shape_errors() {
        let f = FrequencySystem::new(vec![1, 2], vec![0.0, 10.0]).unwrap();
        assert!(BlockVector::from_blocks(&f, vec![vec![1.0], vec![1.0]]).is_err());
        assert!(BlockVector::from_blocks(&f, vec![vec![1.0]]).is_err());
        let v = BlockVector::from_blocks(&f, vec![vec![1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(v.block(1), &[2.0, 3.0]);
        assert_eq!(v.dot(&v), 14.0);
    }

    #[test]
    fn gradient_check_cubic_quartic() {
        let f = scalar_system();
        let u = FnPotential::new(
            "q^3+q^4",
            |q| q[0].powi(3) + q[0].powi(4),
            |q, g| g[0] = 3.0 * q[0] * q[0] + 4.0 * q[0].powi(3),
        );
        let x = BlockVector::from_flat(&f, vec![0.001]).unwrap();
        assert!(gradient_check(&u, &x, 1e-6).unwrap() <= 1e-8);
    }

    #[test]
    fn gradient_check_zero_and_bilinear() {
        let f = FrequencySystem::new(vec![1, 1, 1], vec![0.0, 100.0, 141.0]).unwrap();
        let x = BlockVector::from_flat(&f, vec![0.3, -1.2, 0.7]).unwrap();
        assert_eq!(gradient_check(&ZeroPotential, &x, 1e-6).unwrap(), 0.0);
        let u = FnPotential::new(
            "bilinear",
            |q| 0.01 * q[1] * q[2],
            |q, g| {
                g[0] = 0.0;
                g[1] = 0.01 * q[2];
                g[2] = 0.01 * q[1];
            },
        );
        assert!(gradient_check(&u, &x, 1e-6).unwrap() <= 1e-10);
    }

    #[test]
    fn box_bound_reports_component() {
        let f = scalar_system();
        let u = FnPotential::new("id", |q| q[0], |_, g| g[0] = 1.0).with_bound(10.0);
        let x = BlockVector::from_flat(&f, vec![11.0]).unwrap();
        assert_eq!(u.value(&x), Err(PotentialDomainError { component: 0, value: 11.0 }));
        let nan = BlockVector::from_flat(&f, vec![f64::NAN]).unwrap();
        assert!(u.gradient(&nan).is_err());
    }
}
