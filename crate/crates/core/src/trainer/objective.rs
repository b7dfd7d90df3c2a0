//! Loss and parameter gradient of a model over a point cloud.
//!
//! The trunk runs batched over fixed-size chunks of points. For each point
//! the trunk outputs become leaves of a small scalar tape, on which the
//! hybrid head (if any) and the residuals are recorded; the leaf adjoints
//! are then pushed back through the trunk in one batched sweep per chunk.
//!
//! Chunk boundaries do not depend on the thread count and chunk results are
//! combined in chunk order, so the result is bit-identical whether chunks
//! run on one thread or many.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{DiffScalar, ParamTape, Var};
use crate::autodiff::Real;
use crate::geometry::PointCloud;
use crate::network::{BatchTrace, NetworkError, PinnModel, CHANNELS};
use crate::physics::{point_squares, term_counts, term_scales, FluidParams, LossBreakdown, LossWeights};

/// Points per trunk batch.
pub const CHUNK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Everything on the calling thread.
    #[default]
    Deterministic,
    /// Chunks spread over the rayon pool.
    Parallel,
}

#[derive(Debug, Clone)]
pub struct Objective<'a> {
    cloud: &'a PointCloud,
    fluid: FluidParams,
    scales: [f64; 7],
    execution: Execution,
}

type ChunkResult = Result<([f64; 7], Vec<f64>), NetworkError>;

impl<'a> Objective<'a> {
    /// Each term is a weighted mean over its group within `cloud`.
    pub fn new(cloud: &'a PointCloud, fluid: FluidParams, weights: &LossWeights, execution: Execution) -> Self {
        Self {
            cloud,
            fluid,
            scales: term_scales(&term_counts(cloud), weights),
            execution,
        }
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    fn chunks(&self) -> Vec<std::ops::Range<usize>> {
        let n = self.cloud.len();
        (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect()
    }

    fn map_chunks<R: Send>(&self, f: impl Fn(std::ops::Range<usize>) -> R + Sync + Send) -> Vec<R> {
        let chunks = self.chunks();
        match self.execution {
            Execution::Deterministic => chunks.into_iter().map(f).collect(),
            Execution::Parallel => chunks.into_par_iter().map(f).collect(),
        }
    }

    /// Loss terms without gradient.
    pub fn evaluate(&self, model: &PinnModel) -> Result<LossBreakdown, NetworkError> {
        let parts = self.map_chunks(|range| -> Result<[f64; 7], NetworkError> {
            let outputs = model.try_fields(&self.cloud.points()[range.clone()])?;
            let mut terms = [0.0; 7];
            for (tag, out) in self.cloud.tags()[range].iter().zip(&outputs) {
                for (k, sq) in point_squares(tag, out, &self.fluid).into_iter().enumerate() {
                    if let Some(sq) = sq {
                        terms[k] += self.scales[k] * sq;
                    }
                }
            }
            Ok(terms)
        });
        let mut terms = [0.0; 7];
        for part in parts {
            let part = part?;
            for k in 0..7 {
                terms[k] += part[k];
            }
        }
        Ok(LossBreakdown::from_terms(terms))
    }

    /// Loss terms and the gradient of their sum with respect to
    /// [`PinnModel::flat_params`].
    pub fn loss_and_gradient(&self, model: &PinnModel) -> Result<(LossBreakdown, Vec<f64>), NetworkError> {
        let parts = self.map_chunks(|range| self.chunk_gradient(model, range));
        let mut terms = [0.0; 7];
        let mut grad = vec![0.0; model.num_params()];
        for part in parts {
            let (t, g) = part?;
            for k in 0..7 {
                terms[k] += t[k];
            }
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        Ok((LossBreakdown::from_terms(terms), grad))
    }

    fn chunk_gradient(&self, model: &PinnModel, range: std::ops::Range<usize>) -> ChunkResult {
        let points = &self.cloud.points()[range.clone()];
        let tags = &self.cloud.tags()[range];
        let n = points.len();
        let trunk = model.trunk();
        let trace = BatchTrace::forward(trunk, points)?;
        let width = trunk.output_width();
        let mut out_adj = Array2::<f64>::zeros((width, CHANNELS * n));
        let head = model.head();
        let head_flat: Vec<f64> = head
            .map(|h| h.angles.iter().chain(h.dense.as_flat()).copied().collect())
            .unwrap_or_default();
        let mut head_grad = vec![0.0; head_flat.len()];
        let mut terms = [0.0; 7];
        let mut tape = ParamTape::with_capacity(if head.is_some() { 1 << 16 } else { 1 << 10 });

        for p in 0..n {
            tape.reset();
            let adjoints = {
                let leaves: Vec<DiffScalar<Var<'_>>> = trace
                    .point_output(p)
                    .iter()
                    .map(|o| o.map_components(|c| tape.leaf(c)))
                    .collect();
                let fields = match head {
                    None => [leaves[0], leaves[1], leaves[2], leaves[3]],
                    Some(h) => {
                        let vars: Vec<Var<'_>> = head_flat.iter().map(|&v| tape.param(v)).collect();
                        let (angles, dense) = vars.split_at(h.angles.len());
                        h.apply(&leaves, angles, dense)?
                    }
                };
                let mut loss = ParamTape::constant(0.0);
                for (k, sq) in point_squares(&tags[p], &fields, &self.fluid).into_iter().enumerate() {
                    if let Some(sq) = sq {
                        terms[k] += self.scales[k] * sq.value();
                        loss = loss + sq.scale(self.scales[k]);
                    }
                }
                if loss.is_constant() {
                    continue;
                }
                let adj = tape.backward(loss).expect("loss recorded on this tape");
                for (j, leaf) in leaves.iter().enumerate() {
                    out_adj[[j, p]] = adj.wrt(&leaf.value);
                    for i in 0..3 {
                        out_adj[[j, (1 + i) * n + p]] = adj.wrt(&leaf.grad[i]);
                        out_adj[[j, (4 + i) * n + p]] = adj.wrt(&leaf.hess_diag[i]);
                    }
                }
                adj
            };
            for (g, a) in head_grad.iter_mut().zip(adjoints.parameters()) {
                *g += a;
            }
        }

        let mut grad = trace.backward(trunk, out_adj)?;
        grad.extend_from_slice(&head_grad);
        Ok((terms, grad))
    }
}
