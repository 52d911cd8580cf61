//! Mini-batch Adam training.

use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Activation, AngleEncoding, Codec, Gradients, MlpModel};
use crate::datagen::{Dataset, DataSample};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seeding::{derive_seed, stream_rng, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub validation_split: f64,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub angle_encoding: AngleEncoding,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            validation_split: 0.1,
            hidden_layers: vec![256; 4],
            activation: Activation::Relu,
            angle_encoding: AngleEncoding::SinCos,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("epochs", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size", "must be >= 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::validation("lr", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::validation("beta1", "Adam betas must lie in [0, 1)"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::validation("eps", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return Err(Error::validation("validation_split", "must lie in [0, 1)"));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::validation("hidden_layers", "widths must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean batch loss over the epoch, weighted by batch size.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_train: usize,
    pub n_val: usize,
    pub epochs: Vec<EpochLoss>,
}

impl TrainReport {
    pub fn first_loss(&self) -> f64 {
        self.epochs.first().map_or(f64::NAN, |e| e.train_loss)
    }

    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(f64::NAN, |e| e.train_loss)
    }
}

struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    t: i32,
    m: Gradients<T>,
    v: Gradients<T>,
}

impl<T: Real> Adam<T> {
    fn step(&mut self, model: &mut MlpModel<T>, g: &Gradients<T>) {
        self.t += 1;
        let one = T::one();
        let c1 = one - self.beta1.powi(self.t);
        let c2 = one - self.beta2.powi(self.t);
        for (li, layer) in model.net.layers.iter_mut().enumerate() {
            let params = [&mut layer.weights, &mut layer.bias];
            let grads = [&g.weights[li], &g.bias[li]];
            let ms = [&mut self.m.weights[li], &mut self.m.bias[li]];
            let vs = [&mut self.v.weights[li], &mut self.v.bias[li]];
            for (((p, gr), m), v) in params.into_iter().zip(grads).zip(ms).zip(vs) {
                for k in 0..p.len() {
                    m[k] = self.beta1 * m[k] + (one - self.beta1) * gr[k];
                    v[k] = self.beta2 * v[k] + (one - self.beta2) * gr[k] * gr[k];
                    let m_hat = m[k] / c1;
                    let v_hat = v[k] / c2;
                    p[k] = p[k] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
        }
    }
}

fn reset<T: Real>(g: &mut Gradients<T>) {
    for v in g.weights.iter_mut().chain(g.bias.iter_mut()) {
        v.iter_mut().for_each(|x| *x = T::zero());
    }
}

/// Trains a model on `dataset` using the environment stored in its metadata
/// for input normalization.
pub fn train<T: Real>(dataset: &Dataset<T>, cfg: &TrainConfig) -> Result<(MlpModel<T>, TrainReport)> {
    let env: Environment<T> = crate::datagen::cast_env(&dataset.meta.environment);
    let codec = Codec::for_environment(&env, cfg.angle_encoding);
    train_samples(&dataset.samples, codec, cfg)
}

/// Trains on raw samples with an explicit codec.
///
/// Samples are put in a canonical order before the seeded split and shuffles,
/// so the result does not depend on the order they are supplied in.
pub fn train_samples<T: Real>(
    samples: &[DataSample<T>],
    codec: Codec<T>,
    cfg: &TrainConfig,
) -> Result<(MlpModel<T>, TrainReport)> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let seed = derive_seed(cfg.seed, streams::TRAIN);
    let mut init_rng = stream_rng(seed, u64::MAX);
    let mut model = MlpModel::random(codec, &cfg.hidden_layers, cfg.activation, &mut init_rng);
    let (x_all, y_all) = model.encode_samples(samples)?;
    let w_in = model.net.input_dim();
    let w_out = model.net.output_dim();

    let mut order: Vec<usize> = (0..samples.len()).collect();
    let row_key = |i: usize| {
        x_all[i * w_in..(i + 1) * w_in]
            .iter()
            .chain(&y_all[i * w_out..(i + 1) * w_out])
            .map(|v| v.as_f64())
            .collect::<Vec<f64>>()
    };
    let keys: Vec<Vec<f64>> = (0..samples.len()).map(row_key).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .iter()
            .zip(&keys[b])
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order.shuffle(&mut stream_rng(seed, 0));
    let n_val = ((cfg.validation_split * samples.len() as f64).floor() as usize).min(samples.len() - 1);
    let val_idx: Vec<usize> = order[..n_val].to_vec();
    let mut train_idx: Vec<usize> = order[n_val..].to_vec();

    let gather = |idx: &[usize], src: &[T], w: usize| -> Vec<T> {
        let mut out = Vec::with_capacity(idx.len() * w);
        for &i in idx {
            out.extend_from_slice(&src[i * w..(i + 1) * w]);
        }
        out
    };
    let val_x = gather(&val_idx, &x_all, w_in);
    let val_y = gather(&val_idx, &y_all, w_out);

    let mut adam = Adam {
        lr: T::lit(cfg.lr),
        beta1: T::lit(cfg.beta1),
        beta2: T::lit(cfg.beta2),
        eps: T::lit(cfg.eps),
        t: 0,
        m: model.net.zero_gradients(),
        v: model.net.zero_gradients(),
    };
    let mut grads = model.net.zero_gradients();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        train_idx.shuffle(&mut stream_rng(seed, epoch as u64));
        let mut total = 0.0;
        for (b, batch) in train_idx.chunks(cfg.batch_size).enumerate() {
            let bx = gather(batch, &x_all, w_in);
            let by = gather(batch, &y_all, w_out);
            reset(&mut grads);
            let loss = model.batch_step(&bx, &by, batch.len(), &mut grads);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            total += loss.as_f64() * batch.len() as f64;
            adam.step(&mut model, &grads);
        }
        let train_loss = total / train_idx.len() as f64;
        let val_loss = (n_val > 0).then(|| {
            let acts = model.net.forward_batch(&val_x, n_val);
            let mut scratch = vec![T::zero(); val_y.len()];
            super::mse_loss(
                acts.last().expect("output"),
                &val_y,
                &model.codec.wrapped_features(),
                &mut scratch,
            )
            .as_f64()
        });
        debug!("epoch {epoch}: train {train_loss:.6e} val {val_loss:?}");
        history.push(EpochLoss {
            epoch,
            train_loss,
            val_loss,
        });
    }
    Ok((
        model,
        TrainReport {
            n_train: train_idx.len(),
            n_val,
            epochs: history,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Configuration, Obstacle, RobotModel, Workspace};

    fn env() -> Environment<f64> {
        Environment::new(
            "w",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
        )
    }

    fn sample(c: [f64; 2], g: [f64; 2], n: [f64; 2]) -> DataSample<f64> {
        DataSample {
            current: Configuration::point(c[0], c[1]),
            goal: Configuration::point(g[0], g[1]),
            next: Configuration::point(n[0], n[1]),
            query_id: 0,
            query_non_trivial: true,
            segment_non_trivial: true,
        }
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 30,
            batch_size: 4,
            hidden_layers: vec![16, 16],
            validation_split: 0.25,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let codec = Codec::for_environment(&env(), AngleEncoding::SinCos);
        assert!(matches!(
            train_samples(&[], codec.clone(), &small_cfg()),
            Err(Error::EmptyDataset)
        ));
        let bad = TrainConfig {
            validation_split: 1.0,
            ..small_cfg()
        };
        assert!(train_samples(&[sample([1.0, 1.0], [2.0, 2.0], [1.5, 1.5])], codec, &bad).is_err());
    }

    #[test]
    fn nan_loss_is_reported() {
        let codec = Codec::for_environment(&env(), AngleEncoding::SinCos);
        let s = [sample([1.0, 1.0], [2.0, 2.0], [f64::NAN, 1.5])];
        assert!(matches!(
            train_samples(&s, codec, &small_cfg()),
            Err(Error::NonFiniteLoss { epoch: 1, batch: 0 })
        ));
    }

    #[test]
    fn result_is_independent_of_sample_order() {
        let codec = Codec::for_environment(&env(), AngleEncoding::SinCos);
        let mut s: Vec<_> = (0..12)
            .map(|k| {
                let t = k as f64;
                sample([t, 1.0], [18.0, t], [t + 0.5, 1.5])
            })
            .collect();
        let (a, ra) = train_samples(&s, codec.clone(), &small_cfg()).unwrap();
        s.reverse();
        let (b, rb) = train_samples(&s, codec, &small_cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.n_val, 3);
        assert!(ra.epochs.iter().all(|e| e.val_loss.is_some()));
    }
}
