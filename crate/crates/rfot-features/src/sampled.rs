//! Sampled feature maps phi_theta and measure embeddings.
//!
//! theta = (u_1, ..., u_r) is drawn i.i.d. from the map's sampling law with a
//! counter-based generator keyed by (seed, sample index, coordinate), so
//! sample j is the same no matter how many samples a run requests: a longer
//! run with the same seed extends a shorter one by appending rows.
//!
//! The embedding of a point is phi_theta(x) = (1/sqrt(r)) (phi(x, u_1), ...,
//! phi(x, u_r)) flattened over the per-sample block of p slots, giving
//! k_theta(x, y) = phi_theta(x)^T phi_theta(y) = (1/r) sum_j phi(x,u_j)^T
//! phi(y,u_j).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rfot_core::DiscreteMeasure;

use crate::arccos::ArccosEval;
use crate::error::FeatureError;
use crate::gaussian::GaussianEval;
use crate::rng::{CounterRng, STREAM_FEATURES};
use crate::spec::{FeatureKind, FeatureMapSpec};

/// Relative slack on the domain check ||x|| <= R, absorbing rounding in
/// upstream radius computations (R is often set to a measured max norm).
const DOMAIN_SLACK: f64 = 1e-12;

/// A feature map together with its r sampled parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFeatures {
    spec: FeatureMapSpec,
    theta: Array2<f64>,
    r: usize,
    seed: u64,
}

/// Flat JSON descriptor of a sampled map:
/// `{"kind":"gaussian","epsilon":0.5,"R":1.0,"d":2,"r":1000,"seed":42}`,
/// with `s`, `kappa`, `sigma` added for arc-cosine maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetDescriptor {
    pub kind: String,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub r: usize,
    pub seed: u64,
}

/// Draws theta i.i.d. from the spec's sampling law.
///
/// # Errors
/// - [`FeatureError::ZeroFeatures`] for r = 0.
/// - [`FeatureError::UnsupportedSpec`] for custom maps, which have no
///   sampling law.
pub fn sample_features(
    spec: &FeatureMapSpec,
    r: usize,
    seed: u64,
) -> Result<SampledFeatures, FeatureError> {
    if r == 0 {
        return Err(FeatureError::ZeroFeatures);
    }
    let std = spec.sampling_std()?;
    let rng = CounterRng::new(STREAM_FEATURES, seed);
    let theta = Array2::from_shape_fn((r, spec.dim()), |(j, k)| {
        std * rng.normal(j as u64, k as u64)
    });
    Ok(SampledFeatures {
        spec: *spec,
        theta,
        r,
        seed,
    })
}

impl SampledFeatures {
    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }

    /// Sampled parameters, one row per u_j (r x d).
    pub fn theta(&self) -> ArrayView2<'_, f64> {
        self.theta.view()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Slots per sample (p), so embeddings have width p * r.
    pub fn block_dim(&self) -> usize {
        self.spec.block_dim()
    }

    /// Reconstructs a sampled map from externally stored theta rows.
    ///
    /// # Errors
    /// [`FeatureError::ThetaSizeMismatch`] when the row count differs from r
    /// or the width differs from the spec dimension.
    pub fn from_theta(
        spec: &FeatureMapSpec,
        theta: Array2<f64>,
        seed: u64,
    ) -> Result<Self, FeatureError> {
        if theta.nrows() == 0 {
            return Err(FeatureError::ZeroFeatures);
        }
        if theta.ncols() != spec.dim() {
            return Err(FeatureError::DimensionMismatch {
                expected: spec.dim(),
                got: theta.ncols(),
            });
        }
        Ok(Self {
            spec: *spec,
            r: theta.nrows(),
            theta,
            seed,
        })
    }

    /// Embeds every support point of a measure: row i = phi_theta(x_i),
    /// shape (n, p * r) with the per-sample block of p slots contiguous.
    ///
    /// # Errors
    /// - [`FeatureError::DimensionMismatch`] when the measure dimension
    ///   differs from the spec.
    /// - [`FeatureError::PointOutsideDomain`] for Gaussian maps when a point
    ///   leaves B(0, R); the positivity and moment guarantees hold only
    ///   there.
    pub fn embed(&self, measure: &DiscreteMeasure) -> Result<Array2<f64>, FeatureError> {
        self.embed_points(measure.points())
    }

    /// Embeds raw point rows; see [`SampledFeatures::embed`].
    pub fn embed_points(&self, points: ArrayView2<'_, f64>) -> Result<Array2<f64>, FeatureError> {
        if points.ncols() != self.spec.dim() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.spec.dim(),
                got: points.ncols(),
            });
        }
        if matches!(self.spec.kind(), FeatureKind::Gaussian) {
            let radius = self.spec.radius();
            for (index, row) in points.rows().into_iter().enumerate() {
                let norm = row.iter().map(|&c| c * c).sum::<f64>().sqrt();
                if norm > radius * (1.0 + DOMAIN_SLACK) {
                    return Err(FeatureError::PointOutsideDomain {
                        index,
                        norm,
                        radius,
                    });
                }
            }
        }
        let p = self.block_dim();
        let scale = 1.0 / (self.r as f64).sqrt();
        let theta = self.theta.as_slice().expect("theta is contiguous");
        let d = self.spec.dim();
        let mut out = Array2::zeros((points.nrows(), p * self.r));
        match self.spec.kind() {
            FeatureKind::Gaussian => {
                let eval = GaussianEval::new(&self.spec)?;
                for (i, x) in points.rows().into_iter().enumerate() {
                    let x = x.as_slice().expect("contiguous");
                    let row = out.row_mut(i);
                    let row = row.into_slice().expect("contiguous");
                    for (j, u) in theta.chunks_exact(d).enumerate() {
                        row[j] = scale * eval.eval(x, u);
                    }
                }
            }
            FeatureKind::ArccosPerturbed { .. } => {
                let eval = ArccosEval::new(&self.spec)?;
                for (i, x) in points.rows().into_iter().enumerate() {
                    let x = x.as_slice().expect("contiguous");
                    let row = out.row_mut(i);
                    let row = row.into_slice().expect("contiguous");
                    for (j, u) in theta.chunks_exact(d).enumerate() {
                        let phi = eval.eval(x, u);
                        row[2 * j] = scale * phi[0];
                        row[2 * j + 1] = scale * phi[1];
                    }
                }
            }
            FeatureKind::Custom => {
                return Err(FeatureError::UnsupportedSpec {
                    what: "embedding rule",
                })
            }
        }
        Ok(out)
    }

    /// phi_theta(x) for a single point.
    pub fn embed_point(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>, FeatureError> {
        let points = x
            .to_shape((1, x.len()))
            .expect("1 x d reshape always succeeds");
        let embedded = self.embed_points(points.view())?;
        Ok(embedded.row(0).to_owned())
    }

    /// k_theta(x, y) = phi_theta(x)^T phi_theta(y).
    pub fn kernel_estimate(
        &self,
        x: ArrayView1<'_, f64>,
        y: ArrayView1<'_, f64>,
    ) -> Result<f64, FeatureError> {
        let px = self.embed_point(x)?;
        let py = self.embed_point(y)?;
        Ok(rfot_core::linalg::dot(
            px.as_slice().expect("contiguous"),
            py.as_slice().expect("contiguous"),
        ))
    }

    /// Persists theta as little-endian float64, one row per sample.
    pub fn write_theta(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let file = std::fs::File::create(path)?;
        let mut writer = BufWriter::new(file);
        for &value in self.theta.iter() {
            writer.write_all(&value.to_le_bytes())?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Restores theta written by [`SampledFeatures::write_theta`].
    pub fn read_theta(
        spec: &FeatureMapSpec,
        r: usize,
        seed: u64,
        path: impl AsRef<Path>,
    ) -> Result<Self, FeatureError> {
        let file = std::fs::File::open(path)?;
        let mut reader = BufReader::new(file);
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        let expected = r * spec.dim();
        if bytes.len() != expected * 8 {
            return Err(FeatureError::ThetaSizeMismatch {
                expected,
                got: bytes.len() / 8,
            });
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|chunk| f64::from_le_bytes(chunk.try_into().expect("8-byte chunk")))
            .collect();
        let theta =
            Array2::from_shape_vec((r, spec.dim()), values).expect("size checked above");
        Self::from_theta(spec, theta, seed)
    }

    /// Flat JSON descriptor of this map (spec, r, seed).
    pub fn descriptor(&self) -> FeatureSetDescriptor {
        let (kind, s, kappa, sigma) = match self.spec.kind() {
            FeatureKind::Gaussian => ("gaussian".to_string(), None, None, None),
            FeatureKind::ArccosPerturbed { s, kappa, sigma } => (
                "arccos_perturbed".to_string(),
                Some(s),
                Some(kappa),
                Some(sigma),
            ),
            FeatureKind::Custom => ("custom".to_string(), None, None, None),
        };
        FeatureSetDescriptor {
            kind,
            epsilon: self.spec.epsilon(),
            radius: self.spec.radius(),
            d: self.spec.dim(),
            s,
            kappa,
            sigma,
            r: self.r,
            seed: self.seed,
        }
    }
}

impl FeatureSetDescriptor {
    /// Rebuilds the spec and resamples theta from the recorded seed.
    pub fn build(&self) -> Result<SampledFeatures, FeatureError> {
        let spec = match self.kind.as_str() {
            "gaussian" => FeatureMapSpec::gaussian(self.epsilon, self.radius, self.d)?,
            "arccos_perturbed" => FeatureMapSpec::arccos_perturbed(
                self.s.unwrap_or(1),
                self.kappa.ok_or(FeatureError::NonPositiveKappa(f64::NAN))?,
                self.sigma.ok_or(FeatureError::SigmaNotAboveOne(f64::NAN))?,
                self.epsilon,
                self.radius,
                self.d,
            )?,
            _ => {
                return Err(FeatureError::UnsupportedSpec {
                    what: "descriptor kind",
                })
            }
        };
        sample_features(&spec, self.r, self.seed)
    }
}
