//! Batched forward and reverse passes of an MLP with second-order spatial
//! payloads.
//!
//! Activations of a batch of `N` points are stored as `width × 7N`
//! matrices. Column block `c` holds channel `c` of every point: block 0 is
//! the value, blocks 1..4 the spatial gradient, blocks 4..7 the diagonal
//! Hessian. The affine map acts identically on every channel (the bias only
//! on the value block), so one matrix product per layer moves all payloads.

use ndarray::{s, Array2, ArrayView2, Axis, Zip};

use super::{MlpParams, NetworkError};
use crate::autodiff::{logistic, DiffScalar, SPATIAL_DIMS};

/// Value, three first derivatives, three pure second derivatives.
pub const CHANNELS: usize = 1 + 2 * SPATIAL_DIMS;

/// Cached activations of a batched forward pass.
#[derive(Debug, Clone)]
pub struct BatchTrace {
    n: usize,
    /// Layer inputs, `widths[l] × 7N`.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations, `widths[l+1] × 7N`.
    pre: Vec<Array2<f64>>,
    output: Array2<f64>,
}

#[inline]
fn silu_derivs(z: f64) -> (f64, f64, f64, f64) {
    let s = logistic(z);
    let ds = s * (1.0 - s);
    let d2s = ds * (1.0 - 2.0 * s);
    let d3s = ds * (1.0 - 6.0 * s + 6.0 * s * s);
    (z * s, s + z * ds, 2.0 * ds + z * d2s, 3.0 * d2s + z * d3s)
}

fn weight_matrix(params: &MlpParams, l: usize) -> ArrayView2<'_, f64> {
    let (w, _) = params.layer(l);
    ArrayView2::from_shape((params.widths()[l + 1], params.widths()[l]), w).expect("layer shape")
}

impl BatchTrace {
    /// Run the batch forward. Inputs are seeded so that the gradient of
    /// coordinate `i` is the unit vector `e_i`.
    pub fn forward(params: &MlpParams, points: &[[f64; 3]]) -> Result<Self, NetworkError> {
        if params.input_width() != SPATIAL_DIMS {
            return Err(NetworkError::InputWidth {
                expected: params.input_width(),
                got: SPATIAL_DIMS,
            });
        }
        let n = points.len();
        let mut a = Array2::<f64>::zeros((SPATIAL_DIMS, CHANNELS * n));
        for (p, pt) in points.iter().enumerate() {
            for i in 0..SPATIAL_DIMS {
                a[[i, p]] = pt[i];
                a[[i, (1 + i) * n + p]] = 1.0;
            }
        }
        let layers = params.num_layers();
        let mut inputs = Vec::with_capacity(layers);
        let mut pre = Vec::with_capacity(layers);
        for l in 0..layers {
            let w = weight_matrix(params, l);
            let (_, b) = params.layer(l);
            let mut z = w.dot(&a);
            for (j, mut row) in z.slice_mut(s![.., 0..n]).axis_iter_mut(Axis(0)).enumerate() {
                row += b[j];
            }
            let next = if l + 1 < layers { silu_payload(&z, n) } else { z.clone() };
            inputs.push(std::mem::replace(&mut a, next));
            pre.push(z);
        }
        Ok(Self {
            n,
            inputs,
            pre,
            output: a,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `width_out × 7N` output payload matrix.
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    /// Output payloads of point `p`.
    pub fn point_output(&self, p: usize) -> Vec<DiffScalar<f64>> {
        let n = self.n;
        self.output
            .axis_iter(Axis(0))
            .map(|row| {
                DiffScalar::new(
                    row[p],
                    std::array::from_fn(|i| row[(1 + i) * n + p]),
                    std::array::from_fn(|i| row[(1 + SPATIAL_DIMS + i) * n + p]),
                )
            })
            .collect()
    }

    /// Reverse sweep. `out_adj` has the layout of [`output`](Self::output)
    /// and holds `∂loss/∂(output channel)`. Returns the flat parameter
    /// gradient.
    pub fn backward(&self, params: &MlpParams, out_adj: Array2<f64>) -> Result<Vec<f64>, NetworkError> {
        if out_adj.dim() != self.output.dim() {
            return Err(NetworkError::Mismatch(format!(
                "output adjoint shape {:?} vs output {:?}",
                out_adj.dim(),
                self.output.dim()
            )));
        }
        let n = self.n;
        let layers = params.num_layers();
        let mut grad = vec![0.0; params.len()];
        let mut adj = out_adj;
        for l in (0..layers).rev() {
            if l + 1 < layers {
                adj = silu_payload_backward(&self.pre[l], &adj, n);
            }
            let off = params.layer_offset(l);
            let (fan_in, fan_out) = (params.widths()[l], params.widths()[l + 1]);
            let gw = adj.dot(&self.inputs[l].t());
            grad[off..off + fan_in * fan_out].copy_from_slice(gw.as_slice().expect("standard layout"));
            for (j, row) in adj.slice(s![.., 0..n]).axis_iter(Axis(0)).enumerate() {
                grad[off + fan_in * fan_out + j] = row.sum();
            }
            if l > 0 {
                adj = weight_matrix(params, l).t().dot(&adj);
            }
        }
        Ok(grad)
    }
}

fn silu_payload(z: &Array2<f64>, n: usize) -> Array2<f64> {
    let mut a = Array2::<f64>::zeros(z.raw_dim());
    Zip::from(a.rows_mut()).and(z.rows()).for_each(|mut arow, zrow| {
        for p in 0..n {
            let (f, f1, f2, _) = silu_derivs(zrow[p]);
            arow[p] = f;
            for i in 0..SPATIAL_DIMS {
                let g = zrow[(1 + i) * n + p];
                let h = zrow[(1 + SPATIAL_DIMS + i) * n + p];
                arow[(1 + i) * n + p] = f1 * g;
                arow[(1 + SPATIAL_DIMS + i) * n + p] = f2 * g * g + f1 * h;
            }
        }
    });
    a
}

fn silu_payload_backward(z: &Array2<f64>, adj: &Array2<f64>, n: usize) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros(z.raw_dim());
    Zip::from(out.rows_mut())
        .and(z.rows())
        .and(adj.rows())
        .for_each(|mut orow, zrow, arow| {
            for p in 0..n {
                let (_, f1, f2, f3) = silu_derivs(zrow[p]);
                let mut dv = f1 * arow[p];
                for i in 0..SPATIAL_DIMS {
                    let gi = (1 + i) * n + p;
                    let hi = (1 + SPATIAL_DIMS + i) * n + p;
                    let (g, h) = (zrow[gi], zrow[hi]);
                    let (ag, ah) = (arow[gi], arow[hi]);
                    orow[hi] = f1 * ah;
                    orow[gi] = f1 * ag + 2.0 * f2 * g * ah;
                    dv += f2 * g * ag + (f3 * g * g + f2 * h) * ah;
                }
                orow[p] = dv;
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{seed_spatial, ParamTape, Real};
    use crate::network::forward_with;

    fn points() -> Vec<[f64; 3]> {
        vec![[0.1, 0.2, -0.3], [1.0, -0.5, 0.25], [-0.7, 0.0, 0.9]]
    }

    #[test]
    fn batch_forward_matches_per_point() {
        let p = MlpParams::glorot(vec![3, 6, 5, 4], 2).unwrap();
        let pts = points();
        let trace = BatchTrace::forward(&p, &pts).unwrap();
        for (k, pt) in pts.iter().enumerate() {
            let reference = p.forward(&seed_spatial(*pt).unwrap()).unwrap();
            let batched = trace.point_output(k);
            for (a, b) in reference.iter().zip(&batched) {
                assert!((a.value - b.value).abs() < 1e-13);
                for i in 0..3 {
                    assert!((a.grad[i] - b.grad[i]).abs() < 1e-13);
                    assert!((a.hess_diag[i] - b.hess_diag[i]).abs() < 1e-13);
                }
            }
        }
    }

    /// The batched reverse pass against the scalar tape run through the
    /// generic per-point forward.
    #[test]
    fn batch_backward_matches_tape() {
        let p = MlpParams::glorot(vec![3, 5, 4, 2], 9).unwrap();
        let pts = points();
        // loss = Σ_points Σ_outputs (c0·value + c1·grad_x + c2·hess_z)²
        let coeffs = [0.7, -1.3, 0.4];
        let trace = BatchTrace::forward(&p, &pts).unwrap();
        let n = pts.len();
        let mut adj = Array2::<f64>::zeros(trace.output().raw_dim());
        for k in 0..n {
            for (j, o) in trace.point_output(k).iter().enumerate() {
                let r = coeffs[0] * o.value + coeffs[1] * o.grad[0] + coeffs[2] * o.hess_diag[2];
                adj[[j, k]] += 2.0 * r * coeffs[0];
                adj[[j, n + k]] += 2.0 * r * coeffs[1];
                adj[[j, 6 * n + k]] += 2.0 * r * coeffs[2];
            }
        }
        let batched = trace.backward(&p, adj).unwrap();

        let tape = ParamTape::new();
        let weights: Vec<_> = p.as_flat().iter().map(|&w| tape.param(w)).collect();
        let mut loss = Real::from_f64(0.0);
        for pt in &pts {
            let input = seed_spatial(*pt).unwrap().map(|d| d.map_components(Real::from_f64));
            for o in forward_with(p.widths(), &weights, &input).unwrap() {
                let r = o.value.scale(coeffs[0]) + o.grad[0].scale(coeffs[1]) + o.hess_diag[2].scale(coeffs[2]);
                loss = loss + r * r;
            }
        }
        let reference = tape.backward(loss).unwrap().parameters();
        for (a, b) in batched.iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn empty_batch() {
        let p = MlpParams::glorot(vec![3, 4, 2], 1).unwrap();
        let trace = BatchTrace::forward(&p, &[]).unwrap();
        assert!(trace.is_empty());
        let g = trace.backward(&p, Array2::zeros((2, 0))).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }
}
