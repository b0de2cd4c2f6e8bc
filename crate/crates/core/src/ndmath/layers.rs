use serde::{Deserialize, Serialize};

use super::{shape_err, NdError, Tape, Tensor, Var};
use crate::rng::Prng;

/// Probability clamp used by [`bce_loss`].
pub const BCE_EPSILON: f64 = 1e-7;

/// Affine map `W x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams<T> {
    pub w: T,
    pub b: T,
}

impl<T> DenseParams<T> {
    pub fn map<'s, U>(&'s self, mut f: impl FnMut(&'s T) -> U) -> DenseParams<U> {
        DenseParams {
            w: f(&self.w),
            b: f(&self.b),
        }
    }

    pub fn tensors(&self) -> [(&'static str, &T); 2] {
        [("w", &self.w), ("b", &self.b)]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut T); 2] {
        [("w", &mut self.w), ("b", &mut self.b)]
    }
}

impl DenseParams<Tensor> {
    /// Glorot-uniform weights, zero bias.
    pub fn init(outputs: usize, inputs: usize, rng: &mut Prng) -> Self {
        DenseParams {
            w: Tensor::glorot(outputs, inputs, rng),
            b: Tensor::zeros(&[outputs]),
        }
    }

    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        DenseParams {
            w: Tensor::zeros(&[outputs, inputs]),
            b: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.w.shape()[0]
    }
}

/// One LSTM direction. Gate blocks are stacked in the order input, forget,
/// cell, output: `w_ih` is `4d x n`, `w_hh` is `4d x d`, `b` has `4d`
/// entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams<T> {
    pub w_ih: T,
    pub w_hh: T,
    pub b: T,
}

impl<T> LstmParams<T> {
    pub fn map<'s, U>(&'s self, mut f: impl FnMut(&'s T) -> U) -> LstmParams<U> {
        LstmParams {
            w_ih: f(&self.w_ih),
            w_hh: f(&self.w_hh),
            b: f(&self.b),
        }
    }

    pub fn tensors(&self) -> [(&'static str, &T); 3] {
        [("w_ih", &self.w_ih), ("w_hh", &self.w_hh), ("b", &self.b)]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut T); 3] {
        [("w_ih", &mut self.w_ih), ("w_hh", &mut self.w_hh), ("b", &mut self.b)]
    }
}

impl LstmParams<Tensor> {
    /// Glorot-uniform `w_ih` then `w_hh`, zero bias except the forget block,
    /// which starts at 1.
    pub fn init(inputs: usize, hidden: usize, rng: &mut Prng) -> Self {
        let w_ih = Tensor::glorot(4 * hidden, inputs, rng);
        let w_hh = Tensor::glorot(4 * hidden, hidden, rng);
        let mut b = Tensor::zeros(&[4 * hidden]);
        b.data_mut()[hidden..2 * hidden].fill(1.0);
        LstmParams { w_ih, w_hh, b }
    }

    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        LstmParams {
            w_ih: Tensor::zeros(&[4 * hidden, inputs]),
            w_hh: Tensor::zeros(&[4 * hidden, hidden]),
            b: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.shape()[1]
    }

    pub fn inputs(&self) -> usize {
        self.w_ih.shape()[1]
    }
}

/// `W x + b`.
pub fn dense(tape: &mut Tape<'_>, x: Var, p: &DenseParams<Var>) -> Result<Var, NdError> {
    let wx = tape.matvec(p.w, x)?;
    tape.add(wx, p.b)
}

fn hidden_size(tape: &Tape<'_>, p: &LstmParams<Var>) -> Result<usize, NdError> {
    let w_hh = tape.value(p.w_hh).shape();
    let d = w_hh[w_hh.len() - 1];
    if w_hh != [4 * d, d] || tape.value(p.b).shape() != [4 * d] {
        return Err(shape_err("lstm", &[4 * d, d], w_hh));
    }
    Ok(d)
}

/// Gate nonlinearities and state update from the `4d` pre-activation.
fn lstm_update(
    tape: &mut Tape<'_>,
    pre: Var,
    c_prev: Option<Var>,
    d: usize,
) -> Result<(Var, Var), NdError> {
    let i = tape.slice(pre, 0, d)?;
    let i = tape.sigmoid(i);
    let g = tape.slice(pre, 2 * d, d)?;
    let g = tape.tanh(g);
    let o = tape.slice(pre, 3 * d, d)?;
    let o = tape.sigmoid(o);
    let ig = tape.mul(i, g)?;
    let c = match c_prev {
        None => ig,
        Some(c_prev) => {
            let f = tape.slice(pre, d, d)?;
            let f = tape.sigmoid(f);
            let fc = tape.mul(f, c_prev)?;
            tape.add(fc, ig)?
        }
    };
    let tc = tape.tanh(c);
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}

/// One LSTM step: `i, f, o = σ(·)`, `g = tanh(·)`, `c' = f c + i g`,
/// `h' = o tanh(c')`.
pub fn lstm_cell(
    tape: &mut Tape<'_>,
    x: Var,
    h: Var,
    c: Var,
    p: &LstmParams<Var>,
) -> Result<(Var, Var), NdError> {
    let d = hidden_size(tape, p)?;
    let xw = tape.matvec(p.w_ih, x)?;
    let hw = tape.matvec(p.w_hh, h)?;
    let pre = tape.add_n(&[xw, hw, p.b])?;
    lstm_update(tape, pre, Some(c), d)
}

fn run_direction(
    tape: &mut Tape<'_>,
    x: Var,
    p: &LstmParams<Var>,
    steps: impl Iterator<Item = usize>,
    out: &mut [Option<Var>],
) -> Result<(), NdError> {
    let d = hidden_size(tape, p)?;
    let xw = tape.matmul_nt(x, p.w_ih)?;
    let mut state: Option<(Var, Var)> = None;
    for t in steps {
        let row = tape.slice(xw, t * 4 * d, 4 * d)?;
        let pre = match state {
            None => tape.add(row, p.b)?,
            Some((h, _)) => {
                let hw = tape.matvec(p.w_hh, h)?;
                tape.add_n(&[row, hw, p.b])?
            }
        };
        let next = lstm_update(tape, pre, state.map(|s| s.1), d)?;
        out[t] = Some(next.0);
        state = Some(next);
    }
    Ok(())
}

/// Bidirectional LSTM over the rows of `x` (`T x n`) from zero initial
/// states. Row `t` of the `T x 2d` result is the forward hidden state at
/// `t` followed by the backward hidden state at `t`.
pub fn bilstm(
    tape: &mut Tape<'_>,
    x: Var,
    fwd: &LstmParams<Var>,
    bwd: &LstmParams<Var>,
) -> Result<Var, NdError> {
    let (steps, n) = tape
        .value(x)
        .dims2()
        .ok_or_else(|| shape_err("bilstm", &[0, 0], tape.value(x).shape()))?;
    for p in [fwd, bwd] {
        let w_ih = tape.value(p.w_ih).shape();
        if w_ih.len() != 2 || w_ih[1] != n {
            return Err(shape_err("bilstm", &[w_ih[0], n], w_ih));
        }
    }
    if hidden_size(tape, fwd)? != hidden_size(tape, bwd)? {
        return Err(NdError::Invalid("bilstm directions differ in hidden size".into()));
    }
    let mut forward = vec![None; steps];
    let mut backward = vec![None; steps];
    run_direction(tape, x, fwd, 0..steps, &mut forward)?;
    run_direction(tape, x, bwd, (0..steps).rev(), &mut backward)?;
    let rows: Vec<Var> = forward
        .into_iter()
        .zip(backward)
        .map(|(f, b)| tape.concat(&[f.expect("visited"), b.expect("visited")]))
        .collect();
    tape.stack_rows(&rows)
}

/// Self-attention output: the pooled vector and the attention matrix.
#[derive(Debug, Clone, Copy)]
pub struct Attention {
    pub pooled: Var,
    pub weights: Var,
}

/// `A = softmax_rows(H Hᵀ / sqrt(d))`, `C = A H`, pooled = column mean of
/// `C`, where `d` is the row width of `H`.
pub fn attention_pool(tape: &mut Tape<'_>, h: Var) -> Result<Attention, NdError> {
    let (_, d) = tape
        .value(h)
        .dims2()
        .ok_or_else(|| shape_err("attention_pool", &[0, 0], tape.value(h).shape()))?;
    let scores = tape.matmul_nt(h, h)?;
    let scores = tape.scale(scores, 1.0 / (d as f64).sqrt());
    let weights = tape.softmax_rows(scores)?;
    let context = tape.matmul(weights, h)?;
    let pooled = tape.mean_rows(context)?;
    Ok(Attention { pooled, weights })
}

/// Binary cross-entropy with the probability clamped to
/// `[BCE_EPSILON, 1 - BCE_EPSILON]`; `pos_weight` scales the positive term.
pub fn bce_loss(tape: &mut Tape<'_>, p: Var, y: f64, pos_weight: f64) -> Result<Var, NdError> {
    tape.bce(p, y, pos_weight, BCE_EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::prng;

    #[test]
    fn zero_params_give_zero_states() {
        let x = Tensor::matrix(3, 4, (0..12).map(f64::from).collect()).unwrap();
        let p = LstmParams::zeros(4, 2);
        let mut tape = Tape::new();
        let xv = tape.constant(x);
        let pv = p.map(|t| tape.param(t));
        let h = bilstm(&mut tape, xv, &pv, &pv).unwrap();
        assert_eq!(tape.value(h).shape(), &[3, 4]);
        assert!(tape.value(h).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_attention_is_identity() {
        let mut tape = Tape::new();
        let h = tape.constant(Tensor::matrix(1, 3, vec![0.3, -1.0, 2.0]).unwrap());
        let att = attention_pool(&mut tape, h).unwrap();
        assert_eq!(tape.value(att.pooled).data(), &[0.3, -1.0, 2.0]);
        assert_eq!(tape.value(att.weights).data(), &[1.0]);
    }

    #[test]
    fn dense_identity_and_bias() {
        let p = DenseParams {
            w: Tensor::identity(3),
            b: Tensor::vector(vec![0.5, 0.0, -1.0]),
        };
        let mut tape = Tape::new();
        let pv = p.map(|t| tape.param(t));
        let x = tape.constant(Tensor::vector(vec![1.0, 2.0, 3.0]));
        let y = dense(&mut tape, x, &pv).unwrap();
        assert_eq!(tape.value(y).data(), &[1.5, 2.0, 2.0]);
        let zero = tape.constant(Tensor::zeros(&[3]));
        let y = dense(&mut tape, zero, &pv).unwrap();
        assert_eq!(tape.value(y).data(), &[0.5, 0.0, -1.0]);
    }

    #[test]
    fn bce_values() {
        let mut tape = Tape::new();
        let half = tape.leaf(Tensor::scalar(0.5));
        for y in [0.0, 1.0] {
            let l = bce_loss(&mut tape, half, y, 1.0).unwrap();
            assert!((tape.value(l).item() - std::f64::consts::LN_2).abs() < 1e-15);
        }
        let one = tape.leaf(Tensor::scalar(1.0));
        let l = bce_loss(&mut tape, one, 1.0, 1.0).unwrap();
        assert!(tape.value(l).item() < 1e-6);
    }

    #[test]
    fn forget_bias_initialized_to_one() {
        let p = LstmParams::init(5, 3, &mut prng(0));
        assert_eq!(&p.b.data()[..3], &[0.0; 3]);
        assert_eq!(&p.b.data()[3..6], &[1.0; 3]);
        assert_eq!(&p.b.data()[6..], &[0.0; 6]);
        let limit = (6.0f64 / (12 + 5) as f64).sqrt();
        assert!(p.w_ih.data().iter().all(|v| v.abs() <= limit));
    }
}
