//! Three-layer feedforward network: one-hot state input, ReLU hidden layer,
//! softmax output over successor states. Trained with mini-batch gradient
//! descent on cross-entropy against one-hot successor labels.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{StateSpace, TrainingSet, TransitionMatrix, TransitionPair};
use crate::error::{Error, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredNetwork {
    input_width: usize,
    hidden_width: usize,
    output_width: usize,
    /// hidden x input
    pub(crate) w1: Mat,
    pub(crate) b1: Vec<f64>,
    /// output x hidden
    pub(crate) w2: Mat,
    pub(crate) b2: Vec<f64>,
    seed: u64,
}

/// Scaled-uniform initialization with bound sqrt(6 / (fan_in + fan_out));
/// biases start at zero. Identical seeds give bit-identical parameters.
pub fn init_network(n_states: usize, hidden_width: usize, seed: u64) -> Result<LayeredNetwork> {
    init_with_outputs(n_states, hidden_width, n_states, seed)
}

/// Same initialization with a free choice of output width (the navigation
/// agent uses an 8-way action head).
pub fn init_with_outputs(
    input_width: usize,
    hidden_width: usize,
    output_width: usize,
    seed: u64,
) -> Result<LayeredNetwork> {
    if input_width < 2 {
        return Err(Error::Config(format!(
            "need at least 2 input states, got {input_width}"
        )));
    }
    if hidden_width == 0 || output_width == 0 {
        return Err(Error::Config("layer widths must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = |rows: usize, cols: usize, fan_in: usize, fan_out: usize| {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data: Vec<f64> = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        Mat::from_vec(rows, cols, data).expect("sized to fit")
    };
    let w1 = fill(hidden_width, input_width, input_width, hidden_width);
    let w2 = fill(output_width, hidden_width, hidden_width, output_width);
    Ok(LayeredNetwork {
        input_width,
        hidden_width,
        output_width,
        w1,
        b1: vec![0.0; hidden_width],
        w2,
        b2: vec![0.0; output_width],
        seed,
    })
}

/// Everything needed to re-run a forward pass during backprop.
struct ForwardTrace {
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
    logits: Vec<f64>,
}

impl ForwardTrace {
    fn probs(&self) -> Vec<f64> {
        softmax(&self.logits)
    }
}

impl LayeredNetwork {
    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn output_width(&self) -> usize {
        self.output_width
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Set every weight and bias to zero (uniform softmax output).
    pub fn zero_parameters(&mut self) {
        self.w1.data_mut().fill(0.0);
        self.b1.fill(0.0);
        self.w2.data_mut().fill(0.0);
        self.b2.fill(0.0);
    }

    fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.input_width {
            return Err(Error::StateOutOfRange {
                state,
                n_states: self.input_width,
            });
        }
        Ok(())
    }

    fn trace(&self, state: usize) -> ForwardTrace {
        // one-hot input: the first layer reduces to column `state` of w1
        let hidden_pre: Vec<f64> = (0..self.hidden_width)
            .map(|j| self.w1[(j, state)] + self.b1[j])
            .collect();
        let hidden: Vec<f64> = hidden_pre.iter().map(|&h| h.max(0.0)).collect();
        let mut logits = self.b2.clone();
        for (o, logit) in logits.iter_mut().enumerate() {
            let row = self.w2.row(o);
            *logit += row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        ForwardTrace { hidden_pre, hidden, logits }
    }

    /// Pre-softmax output values for a one-hot state input.
    pub fn logits(&self, state: usize) -> Result<Vec<f64>> {
        self.check_state(state)?;
        Ok(self.trace(state).logits)
    }

    /// Bit-exact text checkpoint of widths, seed and parameters.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_checkpoint())?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_checkpoint(&text)
    }

    pub fn to_checkpoint(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "layered-network 1");
        let _ = writeln!(
            s,
            "widths {} {} {}",
            self.input_width, self.hidden_width, self.output_width
        );
        let _ = writeln!(s, "seed {}", self.seed);
        let dump = |s: &mut String, name: &str, values: &[f64]| {
            s.push_str(name);
            for v in values {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        };
        dump(&mut s, "w1", self.w1.data());
        dump(&mut s, "b1", &self.b1);
        dump(&mut s, "w2", self.w2.data());
        dump(&mut s, "b2", &self.b2);
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "layered-network 1" {
            return Err(Error::Parse(format!(
                "unknown checkpoint header {header:?}"
            )));
        }
        let mut widths: Option<(usize, usize, usize)> = None;
        let mut seed = 0u64;
        let mut arrays: Vec<(String, Vec<f64>)> = Vec::new();
        for line in lines {
            let mut toks = line.split_whitespace();
            let Some(key) = toks.next() else { continue };
            match key {
                "widths" => {
                    let vals: Vec<usize> = toks
                        .map(|t| t.parse().map_err(|e| Error::Parse(format!("widths: {e}"))))
                        .collect::<Result<_>>()?;
                    if vals.len() != 3 {
                        return Err(Error::Parse("widths needs three values".into()));
                    }
                    widths = Some((vals[0], vals[1], vals[2]));
                }
                "seed" => {
                    seed = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::Parse("seed needs a value".into()))?;
                }
                name @ ("w1" | "b1" | "w2" | "b2") => {
                    let vals: Vec<f64> = toks
                        .map(|t| t.parse().map_err(|e| Error::Parse(format!("{name}: {e}"))))
                        .collect::<Result<_>>()?;
                    arrays.push((name.to_string(), vals));
                }
                other => return Err(Error::Parse(format!("unknown checkpoint key {other:?}"))),
            }
        }
        let (iw, hw, ow) =
            widths.ok_or_else(|| Error::Parse("checkpoint missing widths".into()))?;
        let take = |name: &str, len: usize| -> Result<Vec<f64>> {
            let (_, vals) = arrays
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::Parse(format!("checkpoint missing {name}")))?;
            if vals.len() != len {
                return Err(Error::Parse(format!(
                    "{name} has {} values, expected {len}",
                    vals.len()
                )));
            }
            Ok(vals.clone())
        };
        Ok(LayeredNetwork {
            input_width: iw,
            hidden_width: hw,
            output_width: ow,
            w1: Mat::from_vec(hw, iw, take("w1", hw * iw)?)?,
            b1: take("b1", hw)?,
            w2: Mat::from_vec(ow, hw, take("w2", ow * hw)?)?,
            b2: take("b2", ow)?,
            seed,
        })
    }

    /// Backprop for one sample given dL/dlogits, accumulated into `grads`.
    pub(crate) fn accumulate_logit_gradient(
        &self,
        state: usize,
        trace_hidden_pre: &[f64],
        trace_hidden: &[f64],
        dlogits: &[f64],
        grads: &mut Gradients,
    ) {
        for (o, &d) in dlogits.iter().enumerate() {
            grads.b2[o] += d;
            let grow = grads.w2.row_mut(o);
            for (g, h) in grow.iter_mut().zip(trace_hidden) {
                *g += d * h;
            }
        }
        for j in 0..self.hidden_width {
            if trace_hidden_pre[j] <= 0.0 {
                continue;
            }
            let mut dh = 0.0;
            for (o, &d) in dlogits.iter().enumerate() {
                dh += self.w2[(o, j)] * d;
            }
            grads.b1[j] += dh;
            grads.w1[(j, state)] += dh;
        }
    }

    pub(crate) fn apply_gradients(&mut self, grads: &Gradients, step: f64) {
        for (w, g) in self.w1.data_mut().iter_mut().zip(grads.w1.data()) {
            *w -= step * g;
        }
        for (b, g) in self.b1.iter_mut().zip(&grads.b1) {
            *b -= step * g;
        }
        for (w, g) in self.w2.data_mut().iter_mut().zip(grads.w2.data()) {
            *w -= step * g;
        }
        for (b, g) in self.b2.iter_mut().zip(&grads.b2) {
            *b -= step * g;
        }
    }

    fn params_flat_mut(&mut self) -> Vec<*mut f64> {
        let mut ptrs: Vec<*mut f64> = Vec::new();
        for v in self.w1.data_mut() {
            ptrs.push(v as *mut f64);
        }
        for v in self.b1.iter_mut() {
            ptrs.push(v as *mut f64);
        }
        for v in self.w2.data_mut() {
            ptrs.push(v as *mut f64);
        }
        for v in self.b2.iter_mut() {
            ptrs.push(v as *mut f64);
        }
        ptrs
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax distribution over successor states for a one-hot input.
pub fn forward(net: &LayeredNetwork, state: usize) -> Result<Vec<f64>> {
    net.check_state(state)?;
    Ok(net.trace(state).probs())
}

pub(crate) struct Gradients {
    w1: Mat,
    b1: Vec<f64>,
    w2: Mat,
    b2: Vec<f64>,
}

impl Gradients {
    pub(crate) fn zeros(net: &LayeredNetwork) -> Self {
        Gradients {
            w1: Mat::zeros(net.hidden_width, net.input_width),
            b1: vec![0.0; net.hidden_width],
            w2: Mat::zeros(net.output_width, net.hidden_width),
            b2: vec![0.0; net.output_width],
        }
    }

    fn reset(&mut self) {
        self.w1.data_mut().fill(0.0);
        self.b1.fill(0.0);
        self.w2.data_mut().fill(0.0);
        self.b2.fill(0.0);
    }

    fn scale(&mut self, factor: f64) {
        for v in self.w1.data_mut() {
            *v *= factor;
        }
        for v in self.b1.iter_mut() {
            *v *= factor;
        }
        for v in self.w2.data_mut() {
            *v *= factor;
        }
        for v in self.b2.iter_mut() {
            *v *= factor;
        }
    }

    fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(self.w1.data());
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(self.w2.data());
        out.extend_from_slice(&self.b2);
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Shuffle seed; the same seed replays the exact batch sequence.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 64,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean cross-entropy per epoch, measured on the pre-update forward pass.
    pub epoch_loss: Vec<f64>,
    pub duration: Duration,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_loss.last().copied()
    }
}

/// Mean cross-entropy of the network on a set of pairs, without updating.
pub fn batch_loss(net: &LayeredNetwork, pairs: &[TransitionPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Input("loss of an empty batch is undefined".into()));
    }
    let mut total = 0.0;
    for p in pairs {
        net.check_state(p.from)?;
        net.check_state(p.to)?;
        let probs = net.trace(p.from).probs();
        total += -probs[p.to].max(1e-300).ln();
    }
    Ok(total / pairs.len() as f64)
}

/// Mini-batch gradient descent on cross-entropy. Shuffles the data every
/// epoch with the configured seed; updates the network in place. An empty
/// training set leaves the parameters untouched and reports no loss entries.
pub fn train(
    net: &mut LayeredNetwork,
    data: &TrainingSet,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    let start = Instant::now();
    if data.pairs.is_empty() {
        return Ok(TrainReport {
            epoch_loss: Vec::new(),
            duration: start.elapsed(),
        });
    }
    for p in &data.pairs {
        net.check_state(p.from)?;
        net.check_state(p.to)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.pairs.len()).collect();
    let mut grads = Gradients::zeros(net);
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            grads.reset();
            for &idx in chunk {
                let p = data.pairs[idx];
                let trace = net.trace(p.from);
                let mut dlogits = trace.probs();
                loss_sum += -dlogits[p.to].max(1e-300).ln();
                dlogits[p.to] -= 1.0;
                net.accumulate_logit_gradient(
                    p.from,
                    &trace.hidden_pre,
                    &trace.hidden,
                    &dlogits,
                    &mut grads,
                );
            }
            grads.scale(1.0 / chunk.len() as f64);
            net.apply_gradients(&grads, cfg.learning_rate);
        }
        epoch_loss.push(loss_sum / data.pairs.len() as f64);
    }

    Ok(TrainReport {
        epoch_loss,
        duration: start.elapsed(),
    })
}

/// Concatenate the per-state softmax predictions into a full transition
/// matrix. Rows for wall/terminal states are produced too (the network
/// answers for any one-hot input) but flagged as untrained.
pub fn predict_tp_matrix(net: &LayeredNetwork, space: &StateSpace) -> Result<TransitionMatrix> {
    let n = space.n_states();
    if net.input_width() != n || net.output_width() != n {
        return Err(Error::Shape(format!(
            "network is {}x{}, space has {n} states",
            net.input_width(),
            net.output_width()
        )));
    }
    let mut mat = Mat::zeros(n, n);
    let mut untrained = vec![false; n];
    for s in 0..n {
        let probs = forward(net, s)?;
        mat.row_mut(s).copy_from_slice(&probs);
        untrained[s] = space.is_terminal(s);
    }
    TransitionMatrix::new(mat, untrained, 1e-9)
}

/// Compare analytic gradients against central finite differences of the
/// batch loss. Returns the worst relative error over every parameter.
pub fn gradient_check(
    net: &mut LayeredNetwork,
    pairs: &[TransitionPair],
    fd_step: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Input(
            "gradient check needs at least one pair".into(),
        ));
    }
    let mut grads = Gradients::zeros(net);
    for p in pairs {
        let trace = net.trace(p.from);
        let mut dlogits = trace.probs();
        dlogits[p.to] -= 1.0;
        net.accumulate_logit_gradient(
            p.from,
            &trace.hidden_pre,
            &trace.hidden,
            &dlogits,
            &mut grads,
        );
    }
    grads.scale(1.0 / pairs.len() as f64);
    let analytic = grads.flat();

    let ptrs = net.params_flat_mut();
    let mut worst = 0.0f64;
    for (i, &ptr) in ptrs.iter().enumerate() {
        // SAFETY: pointers come from disjoint fields of `net`, which is
        // exclusively borrowed for the duration of this loop; batch_loss
        // only reads the parameters.
        let original = unsafe { *ptr };
        unsafe { *ptr = original + fd_step };
        let plus = batch_loss(net, pairs)?;
        unsafe { *ptr = original - fd_step };
        let minus = batch_loss(net, pairs)?;
        unsafe { *ptr = original };
        let numeric = (plus - minus) / (2.0 * fd_step);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-4);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}
