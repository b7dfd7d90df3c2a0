//! Complete PINN models: the classical MLP, or the hybrid composition
//! trunk → `π·tanh` angle encoding → variational circuit → dense `4 → 4`.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{forward_with, Architecture, BatchTrace, MlpParams, NetworkError, Variant, FEATURE_WIDTH, OUTPUT_WIDTH};
use crate::autodiff::{DiffScalar, Real};
use crate::physics::FieldModel;
use crate::quantum::{encode_feature, run_circuit, CircuitSpec};

/// Half-width of the uniform initialization of the variational angles.
pub const ANGLE_INIT_RANGE: f64 = 0.1;

/// Quantum layer plus the dense output layer of the hybrid model.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridHead {
    pub circuit: CircuitSpec,
    pub angles: Vec<f64>,
    /// Single affine layer from the readouts to `(v, p)`.
    pub dense: MlpParams,
}

impl HybridHead {
    pub fn init(seed: u64) -> Self {
        let circuit = CircuitSpec::hybrid_default();
        // Separate streams for the head so it does not alias the trunk draws.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0a11_9e4d_u64);
        let dist = Uniform::new_inclusive(-ANGLE_INIT_RANGE, ANGLE_INIT_RANGE).expect("finite range");
        let angles = dist.sample_iter(&mut rng).take(circuit.n_params).collect();
        let dense = MlpParams::glorot(vec![circuit.readout.len(), OUTPUT_WIDTH], seed.wrapping_add(0x0dd5)).expect("valid widths");
        Self { circuit, angles, dense }
    }

    pub fn num_params(&self) -> usize {
        self.angles.len() + self.dense.len()
    }

    pub fn validate(&self, trunk_width: usize) -> Result<(), NetworkError> {
        self.circuit
            .validate()
            .map_err(|e| NetworkError::Mismatch(e.to_string()))?;
        if self.circuit.n_features != trunk_width {
            return Err(NetworkError::Mismatch(format!(
                "circuit encodes {} features but the trunk yields {trunk_width}",
                self.circuit.n_features
            )));
        }
        if self.angles.len() != self.circuit.n_params {
            return Err(NetworkError::Mismatch(format!(
                "{} angles for {} circuit parameters",
                self.angles.len(),
                self.circuit.n_params
            )));
        }
        if self.dense.widths() != [self.circuit.readout.len(), OUTPUT_WIDTH] {
            return Err(NetworkError::Mismatch(format!("dense head widths {:?}", self.dense.widths())));
        }
        Ok(())
    }

    /// Map trunk features to `(v, p)`. Angles and dense weights are supplied
    /// in the payload's component type so they can live on a tape.
    pub fn apply<T: Real>(
        &self,
        features: &[DiffScalar<T>],
        angles: &[T],
        dense: &[T],
    ) -> Result<[DiffScalar<T>; 4], NetworkError> {
        let encoded: Vec<DiffScalar<T>> = features.iter().map(|&f| encode_feature(f)).collect();
        let thetas: Vec<DiffScalar<T>> = angles.iter().map(|&a| DiffScalar::constant(a)).collect();
        let readout = run_circuit(&self.circuit, &encoded, &thetas).map_err(|e| NetworkError::Mismatch(e.to_string()))?;
        let out = forward_with(self.dense.widths(), dense, &readout)?;
        Ok([out[0], out[1], out[2], out[3]])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnModel {
    trunk: MlpParams,
    head: Option<HybridHead>,
}

impl PinnModel {
    pub fn classical(mlp: MlpParams) -> Result<Self, NetworkError> {
        if mlp.input_width() != 3 || mlp.output_width() != OUTPUT_WIDTH {
            return Err(NetworkError::Mismatch(format!(
                "classical model needs 3 inputs and {OUTPUT_WIDTH} outputs, got widths {:?}",
                mlp.widths()
            )));
        }
        Ok(Self { trunk: mlp, head: None })
    }

    pub fn hybrid(trunk: MlpParams, head: HybridHead) -> Result<Self, NetworkError> {
        if trunk.input_width() != 3 {
            return Err(NetworkError::Mismatch(format!("trunk widths {:?}", trunk.widths())));
        }
        head.validate(trunk.output_width())?;
        Ok(Self { trunk, head: Some(head) })
    }

    /// Fresh model of the given variant.
    pub fn init(seed: u64, variant: Variant) -> Self {
        let mlp = super::init_params(seed, variant);
        match variant {
            Variant::Classical => Self::classical(mlp),
            Variant::Hybrid => Self::hybrid(mlp, HybridHead::init(seed)),
        }
        .expect("built-in architecture is consistent")
    }

    /// Hybrid model whose trunk is the classical network with its final
    /// `16 → 4` layer removed.
    pub fn hybrid_from_classical(classical: &PinnModel, seed: u64) -> Result<Self, NetworkError> {
        if classical.variant() != Variant::Classical {
            return Err(NetworkError::Mismatch("pretrained trunk must come from a classical model".into()));
        }
        let widths = classical.trunk.widths();
        let cut = widths.len() - 1;
        if widths[cut - 1] != FEATURE_WIDTH {
            return Err(NetworkError::Mismatch(format!(
                "penultimate width {} but the circuit expects {FEATURE_WIDTH} features",
                widths[cut - 1]
            )));
        }
        let trunk_widths = widths[..cut].to_vec();
        let n = super::param_count(&trunk_widths);
        let trunk = MlpParams::from_flat(trunk_widths, classical.trunk.as_flat()[..n].to_vec())?;
        Self::hybrid(trunk, HybridHead::init(seed))
    }

    pub fn variant(&self) -> Variant {
        if self.head.is_some() {
            Variant::Hybrid
        } else {
            Variant::Classical
        }
    }

    pub fn trunk(&self) -> &MlpParams {
        &self.trunk
    }

    pub fn head(&self) -> Option<&HybridHead> {
        self.head.as_ref()
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            variant: self.variant(),
            mlp_widths: self.trunk.widths().to_vec(),
            circuit: self.head.as_ref().map(|h| h.circuit.clone()),
            head_widths: self.head.as_ref().map(|h| h.dense.widths().to_vec()),
        }
    }

    pub fn num_params(&self) -> usize {
        self.trunk.len() + self.head.as_ref().map_or(0, HybridHead::num_params)
    }

    /// Trunk parameters, then variational angles, then dense head.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut v = self.trunk.as_flat().to_vec();
        if let Some(h) = &self.head {
            v.extend_from_slice(&h.angles);
            v.extend_from_slice(h.dense.as_flat());
        }
        v
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<(), NetworkError> {
        if flat.len() != self.num_params() {
            return Err(NetworkError::ParamCount {
                widths: self.trunk.widths().to_vec(),
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let nt = self.trunk.len();
        self.trunk.set_flat(&flat[..nt])?;
        if let Some(h) = &mut self.head {
            let na = h.angles.len();
            h.angles.copy_from_slice(&flat[nt..nt + na]);
            h.dense.set_flat(&flat[nt + na..])?;
        }
        Ok(())
    }

    pub fn with_flat_params(&self, flat: &[f64]) -> Result<Self, NetworkError> {
        let mut m = self.clone();
        m.set_flat_params(flat)?;
        Ok(m)
    }

    /// Per-point forward through the generic scalar path.
    pub fn forward_point<T: Real>(&self, input: &[DiffScalar<T>; 3]) -> Result<[DiffScalar<T>; 4], NetworkError> {
        let out = self.trunk.forward(input)?;
        match &self.head {
            None => Ok([out[0], out[1], out[2], out[3]]),
            Some(h) => {
                let angles: Vec<T> = h.angles.iter().map(|&a| T::from_f64(a)).collect();
                let dense: Vec<T> = h.dense.as_flat().iter().map(|&w| T::from_f64(w)).collect();
                h.apply(&out, &angles, &dense)
            }
        }
    }

    /// Plain `(v_x, v_y, v_z, p)` predictions.
    pub fn predict(&self, points: &[[f64; 3]]) -> Result<Vec<[f64; 4]>, NetworkError> {
        match &self.head {
            None => points
                .iter()
                .map(|p| self.trunk.eval(p).map(|o| [o[0], o[1], o[2], o[3]]))
                .collect(),
            Some(h) => points
                .iter()
                .map(|p| {
                    let features: Vec<DiffScalar<f64>> = self.trunk.eval(p)?.into_iter().map(DiffScalar::constant).collect();
                    let out = h.apply(&features, &h.angles, h.dense.as_flat())?;
                    Ok(out.map(|o| o.value))
                })
                .collect(),
        }
    }

    /// Batched payload evaluation.
    pub fn try_fields(&self, points: &[[f64; 3]]) -> Result<Vec<[DiffScalar<f64>; 4]>, NetworkError> {
        let trace = BatchTrace::forward(&self.trunk, points)?;
        (0..points.len())
            .map(|p| {
                let out = trace.point_output(p);
                match &self.head {
                    None => Ok([out[0], out[1], out[2], out[3]]),
                    Some(h) => h.apply(&out, &h.angles, h.dense.as_flat()),
                }
            })
            .collect()
    }
}

impl FieldModel for PinnModel {
    fn fields(&self, points: &[[f64; 3]]) -> Vec<[DiffScalar<f64>; 4]> {
        self.try_fields(points)
            .expect("architecture validated at construction")
    }
}
