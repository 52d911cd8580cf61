//! Next-state prediction network.
//!
//! A model maps an encoded `(current, goal)` pair to the encoded next
//! configuration. Positions are normalized by the workspace center and
//! half-extent. Angles are either fed as `(sin, cos)` pairs and decoded with
//! `atan2`, or scaled by `1/pi` and compared through the wrapped difference.
//!
//! Model file layout (little endian, all reals stored as f64):
//!
//! | field          | type                          |
//! |----------------|-------------------------------|
//! | magic          | `b"NTQMODEL"`                 |
//! | version        | u32 (= 1)                     |
//! | kind tag, dim  | u8, u32                       |
//! | angle encoding | u8 (0 = sin/cos, 1 = wrapped) |
//! | shift, scale   | dim f64 each                  |
//! | layer count    | u32                           |
//! | per layer      | inputs u32, outputs u32, activation u8, weights (row-major), bias |

mod mlp;
mod train;

pub use mlp::{Activation, Dense, Gradients, Mlp};
pub use train::{train, train_samples, EpochLoss, TrainConfig, TrainReport};

use std::path::Path as FsPath;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::DataSample;
use crate::env::{ConfigKind, Configuration, Environment};
use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

const MODEL_MAGIC: &[u8; 8] = b"NTQMODEL";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleEncoding {
    SinCos,
    Wrapped,
}

/// Maps configurations to normalized network features and back.
#[derive(Debug, Clone, PartialEq)]
pub struct Codec<T> {
    pub kind: ConfigKind,
    pub encoding: AngleEncoding,
    /// Per-coordinate offset; zero for angles.
    pub shift: Vec<T>,
    /// Per-coordinate half-range; `pi` for angles.
    pub scale: Vec<T>,
}

impl<T: Real> Codec<T> {
    pub fn for_environment(env: &Environment<T>, encoding: AngleEncoding) -> Self {
        let (lo, hi) = env.config_bounds();
        let two = T::lit(2.0);
        Codec {
            kind: env.config_kind(),
            encoding,
            shift: lo.iter().zip(&hi).map(|(&a, &b)| (a + b) / two).collect(),
            scale: lo.iter().zip(&hi).map(|(&a, &b)| (b - a) / two).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.kind.dim();
        if self.shift.len() != d || self.scale.len() != d {
            return Err(Error::format("model", "normalization length differs from dimension"));
        }
        if self.shift.iter().any(|v| !v.is_finite())
            || self.scale.iter().any(|v| !v.is_finite() || *v == T::zero())
        {
            return Err(Error::format("model", "normalization constants must be finite, scale nonzero"));
        }
        Ok(())
    }

    /// Width of one encoded configuration.
    pub fn width(&self) -> usize {
        let d = self.kind.dim();
        match self.encoding {
            AngleEncoding::Wrapped => d,
            AngleEncoding::SinCos => d + (0..d).filter(|&i| self.kind.is_angular(i)).count(),
        }
    }

    pub fn encode_into(&self, c: &Configuration<T>, out: &mut Vec<T>) {
        for (i, v) in c.coords().into_iter().enumerate() {
            if self.kind.is_angular(i) && self.encoding == AngleEncoding::SinCos {
                out.push(v.sin());
                out.push(v.cos());
            } else {
                out.push((v - self.shift[i]) / self.scale[i]);
            }
        }
    }

    pub fn decode(&self, features: &[T]) -> Configuration<T> {
        let mut coords = Vec::with_capacity(self.kind.dim());
        let mut k = 0;
        for i in 0..self.kind.dim() {
            if self.kind.is_angular(i) && self.encoding == AngleEncoding::SinCos {
                coords.push(features[k].atan2(features[k + 1]));
                k += 2;
            } else {
                coords.push(features[k] * self.scale[i] + self.shift[i]);
                k += 1;
            }
        }
        Configuration::from_coords(self.kind, &coords).expect("decoded width matches kind")
    }

    /// Scale of each encoded feature that is compared through the wrapped
    /// difference, `None` for plain features.
    fn wrapped_features(&self) -> Vec<Option<T>> {
        let mut out = Vec::with_capacity(self.width());
        for i in 0..self.kind.dim() {
            let angular = self.kind.is_angular(i);
            match (angular, self.encoding) {
                (true, AngleEncoding::SinCos) => out.extend([None, None]),
                (true, AngleEncoding::Wrapped) => out.push(Some(self.scale[i])),
                (false, _) => out.push(None),
            }
        }
        out
    }
}

/// Mean squared error over a batch of encoded predictions; writes the
/// gradient with respect to `pred` into `d_pred`.
pub(crate) fn mse_loss<T: Real>(
    pred: &[T],
    target: &[T],
    wrapped: &[Option<T>],
    d_pred: &mut [T],
) -> T {
    let m = wrapped.len();
    let n = T::from_count(pred.len());
    let two = T::lit(2.0);
    let mut total = T::zero();
    for (k, ((&p, &t), d)) in pred.iter().zip(target).zip(d_pred.iter_mut()).enumerate() {
        let e = match wrapped[k % m] {
            Some(s) => wrap_angle((p - t) * s) / s,
            None => p - t,
        };
        total = total + e * e;
        *d = two * e / n;
    }
    total / n
}

/// Learned next-state predictor for one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    pub codec: Codec<T>,
    pub net: Mlp<T>,
}

impl<T: Real> MlpModel<T> {
    pub fn new(codec: Codec<T>, net: Mlp<T>) -> Result<Self> {
        codec.validate()?;
        let w = codec.width();
        if net.input_dim() != 2 * w || net.output_dim() != w {
            return Err(Error::DimensionMismatch {
                expected: format!("network {} -> {}", 2 * w, w),
                got: format!("network {} -> {}", net.input_dim(), net.output_dim()),
            });
        }
        for pair in net.layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::format("model", "consecutive layer sizes differ"));
            }
        }
        Ok(MlpModel { codec, net })
    }

    /// Randomly initialized model with the given hidden widths.
    pub fn random<R: Rng + ?Sized>(
        codec: Codec<T>,
        hidden: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let w = codec.width();
        let net = Mlp::random(2 * w, hidden, w, activation, rng);
        MlpModel::new(codec, net).expect("consistent shapes")
    }

    pub fn kind(&self) -> ConfigKind {
        self.codec.kind
    }

    pub fn encode_input(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Vec<T> {
        let mut x = Vec::with_capacity(2 * self.codec.width());
        self.codec.encode_into(current, &mut x);
        self.codec.encode_into(goal, &mut x);
        x
    }

    /// Predicted next configuration; angles are wrapped.
    pub fn forward(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Result<Configuration<T>> {
        for c in [current, goal] {
            if c.kind() != self.kind() {
                return Err(Error::DimensionMismatch {
                    expected: self.kind().to_string(),
                    got: c.kind().to_string(),
                });
            }
        }
        Ok(self.predict(current, goal))
    }

    pub(crate) fn predict(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Configuration<T> {
        let out = self.net.forward(&self.encode_input(current, goal));
        self.codec.decode(&out)
    }

    /// Encoded inputs and targets, row-major.
    pub fn encode_samples(&self, samples: &[DataSample<T>]) -> Result<(Vec<T>, Vec<T>)> {
        let w = self.codec.width();
        let mut x = Vec::with_capacity(samples.len() * 2 * w);
        let mut y = Vec::with_capacity(samples.len() * w);
        for s in samples {
            for c in [&s.current, &s.goal, &s.next] {
                if c.kind() != self.kind() {
                    return Err(Error::DimensionMismatch {
                        expected: self.kind().to_string(),
                        got: c.kind().to_string(),
                    });
                }
            }
            self.codec.encode_into(&s.current, &mut x);
            self.codec.encode_into(&s.goal, &mut x);
            self.codec.encode_into(&s.next, &mut y);
        }
        Ok((x, y))
    }

    /// Training loss on `samples` and its gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, samples: &[DataSample<T>]) -> Result<(T, Gradients<T>)> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (x, y) = self.encode_samples(samples)?;
        let mut grads = self.net.zero_gradients();
        let loss = self.batch_step(&x, &y, samples.len(), &mut grads);
        Ok((loss, grads))
    }

    /// Training loss on `samples`.
    pub fn loss(&self, samples: &[DataSample<T>]) -> Result<T> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (x, y) = self.encode_samples(samples)?;
        let acts = self.net.forward_batch(&x, samples.len());
        let mut scratch = vec![T::zero(); y.len()];
        Ok(mse_loss(
            acts.last().expect("output"),
            &y,
            &self.codec.wrapped_features(),
            &mut scratch,
        ))
    }

    pub(crate) fn batch_step(&self, x: &[T], y: &[T], batch: usize, grads: &mut Gradients<T>) -> T {
        let acts = self.net.forward_batch(x, batch);
        let mut d_out = vec![T::zero(); y.len()];
        let loss = mse_loss(
            acts.last().expect("output"),
            y,
            &self.codec.wrapped_features(),
            &mut d_out,
        );
        self.net.backward_batch(&acts, &d_out, batch, grads);
        loss
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        let (tag, dim) = self.kind().tag();
        out.push(tag);
        out.extend_from_slice(&dim.to_le_bytes());
        out.push(match self.codec.encoding {
            AngleEncoding::SinCos => 0,
            AngleEncoding::Wrapped => 1,
        });
        let put = |out: &mut Vec<u8>, v: T| out.extend_from_slice(&v.as_f64().to_le_bytes());
        for &v in self.codec.shift.iter().chain(&self.codec.scale) {
            put(&mut out, v);
        }
        out.extend_from_slice(&(self.net.layers.len() as u32).to_le_bytes());
        for l in &self.net.layers {
            out.extend_from_slice(&(l.inputs as u32).to_le_bytes());
            out.extend_from_slice(&(l.outputs as u32).to_le_bytes());
            out.push(l.activation.tag());
            for &v in l.weights.iter().chain(&l.bias) {
                put(&mut out, v);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(8)? != MODEL_MAGIC {
            return Err(Error::format("model", "bad magic"));
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(Error::format("model", format!("unsupported version {version}")));
        }
        let tag = r.u8()?;
        let dim = r.u32()?;
        let kind = ConfigKind::from_tag(tag, dim)
            .ok_or_else(|| Error::format("model", format!("unknown kind tag {tag}/{dim}")))?;
        let encoding = match r.u8()? {
            0 => AngleEncoding::SinCos,
            1 => AngleEncoding::Wrapped,
            e => return Err(Error::format("model", format!("unknown angle encoding {e}"))),
        };
        let d = kind.dim();
        let shift = r.reals::<T>(d)?;
        let scale = r.reals::<T>(d)?;
        let n_layers = r.u32()? as usize;
        if n_layers == 0 {
            return Err(Error::format("model", "no layers"));
        }
        let mut layers = Vec::with_capacity(n_layers.min(1024));
        for _ in 0..n_layers {
            let inputs = r.u32()? as usize;
            let outputs = r.u32()? as usize;
            let activation = Activation::from_tag(r.u8()?)
                .ok_or_else(|| Error::format("model", "unknown activation"))?;
            let n_w = inputs
                .checked_mul(outputs)
                .filter(|&n| n <= bytes.len())
                .ok_or_else(|| Error::format("model", "layer too large for file"))?;
            layers.push(Dense {
                inputs,
                outputs,
                weights: r.reals(n_w)?,
                bias: r.reals(outputs)?,
                activation,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::format("model", "trailing bytes"));
        }
        let codec = Codec {
            kind,
            encoding,
            shift,
            scale,
        };
        MlpModel::new(codec, Mlp { layers })
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        MlpModel::from_bytes(&std::fs::read(path)?)
    }
}

struct ByteReader<'b> {
    bytes: &'b [u8],
    pos: usize,
}

impl<'b> ByteReader<'b> {
    fn take(&mut self, n: usize) -> Result<&'b [u8]> {
        if n > self.bytes.len() - self.pos {
            return Err(Error::format("model", "unexpected end of file"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn reals<T: Real>(&mut self, n: usize) -> Result<Vec<T>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::format("model", "overflow"))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Obstacle, RobotModel, Workspace};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point_env() -> Environment<f64> {
        Environment::new(
            "p",
            Workspace::new(0.0, 20.0, 0.0, 10.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 5.0)],
        )
    }

    fn rigid_env() -> Environment<f64> {
        Environment::new(
            "r",
            Workspace::new(0.0, 10.0, 0.0, 10.0),
            RobotModel::RigidBody {
                vertices: vec![[-0.3, -0.1], [0.3, -0.1], [0.3, 0.1], [-0.3, 0.1]],
            },
            vec![],
        )
    }

    fn zero_model(env: &Environment<f64>, enc: AngleEncoding) -> MlpModel<f64> {
        let codec = Codec::for_environment(env, enc);
        let w = codec.width();
        let net = Mlp {
            layers: vec![Dense::zeros(2 * w, 8, Activation::Relu), Dense::zeros(8, w, Activation::Identity)],
        };
        MlpModel::new(codec, net).unwrap()
    }

    #[test]
    fn zero_network_outputs_center() {
        let env = point_env();
        let m = zero_model(&env, AngleEncoding::SinCos);
        let out = m.forward(&Configuration::point(1.0, 2.0), &Configuration::point(3.0, 4.0)).unwrap();
        assert_eq!(out, Configuration::point(10.0, 5.0));
        let env = rigid_env();
        for enc in [AngleEncoding::SinCos, AngleEncoding::Wrapped] {
            let m = zero_model(&env, enc);
            let c = Configuration::pose(1.0, 1.0, 2.0);
            assert_eq!(m.forward(&c, &c).unwrap(), Configuration::pose(5.0, 5.0, 0.0));
        }
    }

    #[test]
    fn identity_on_goal_block_returns_goal() {
        let env = rigid_env();
        let codec = Codec::for_environment(&env, AngleEncoding::SinCos);
        let w = codec.width();
        let mut layer = Dense::zeros(2 * w, w, Activation::Identity);
        for o in 0..w {
            layer.weights[o * 2 * w + w + o] = 1.0;
        }
        let m = MlpModel::new(codec, Mlp { layers: vec![layer] }).unwrap();
        let goal = Configuration::pose(7.25, 3.5, -2.5);
        let out = m.forward(&Configuration::pose(1.0, 1.0, 0.3), &goal).unwrap();
        for (a, b) in out.coords().iter().zip(goal.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_rejects_wrong_kind() {
        let m = zero_model(&point_env(), AngleEncoding::SinCos);
        let r = m.forward(&Configuration::pose(0.0, 0.0, 0.0), &Configuration::point(1.0, 1.0));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bytes_round_trip() {
        let env = rigid_env();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for enc in [AngleEncoding::SinCos, AngleEncoding::Wrapped] {
            let m = MlpModel::random(Codec::for_environment(&env, enc), &[6, 5], Activation::Tanh, &mut rng);
            let back = MlpModel::<f64>::from_bytes(&m.to_bytes()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn corrupt_model_files_rejected() {
        let env = point_env();
        let m = zero_model(&env, AngleEncoding::SinCos);
        let bytes = m.to_bytes();
        assert!(MlpModel::<f64>::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(MlpModel::<f64>::from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(MlpModel::<f64>::from_bytes(&extra).is_err());
    }

    #[test]
    fn wrapped_loss_uses_short_arc() {
        let wrapped = [Some(std::f64::consts::PI)];
        let mut d = [0.0];
        // 0.99 and -0.99 (in units of pi) are 0.02 apart across the seam
        let l = mse_loss(&[0.99], &[-0.99], &wrapped, &mut d);
        assert!((l - 0.0004).abs() < 1e-12);
        assert!(d[0] < 0.0);
    }
}
