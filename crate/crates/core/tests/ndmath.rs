mod common;

use pdcnet::ndmath::{
    adam_step, attention_pool, bce_loss, bilstm, dense, grad_check, lstm_cell, AdamConfig,
    AdamState, DenseParams, LstmParams, Tape, Tensor,
};
use pdcnet::rng::{below, prng, uniform};

use common::{random_tensor, weighted_sum};

const INSTANCES: u64 = 20;

#[test]
fn dense_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let (m, n) = (1 + below(&mut rng, 5), 1 + below(&mut rng, 5));
        let inputs = [
            random_tensor(&[m, n], &mut rng),
            random_tensor(&[m], &mut rng),
            random_tensor(&[n], &mut rng),
        ];
        let err = grad_check(&inputs, |tape, v| {
            let y = dense(tape, v[2], &DenseParams { w: v[0], b: v[1] })?;
            weighted_sum(tape, y, seed + 100)
        })
        .unwrap();
        assert!(err < 1e-6, "seed {seed}: {err}");
    }
}

#[test]
fn lstm_cell_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let (n, d) = (1 + below(&mut rng, 4), 1 + below(&mut rng, 3));
        let inputs = [
            random_tensor(&[4 * d, n], &mut rng),
            random_tensor(&[4 * d, d], &mut rng),
            random_tensor(&[4 * d], &mut rng),
            random_tensor(&[n], &mut rng),
            random_tensor(&[d], &mut rng),
            random_tensor(&[d], &mut rng),
        ];
        let err = grad_check(&inputs, |tape, v| {
            let p = LstmParams { w_ih: v[0], w_hh: v[1], b: v[2] };
            let (h, c) = lstm_cell(tape, v[3], v[4], v[5], &p)?;
            let hc = tape.concat(&[h, c]);
            weighted_sum(tape, hc, seed + 200)
        })
        .unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn bilstm_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let (t, n, d) = (1 + below(&mut rng, 4), 1 + below(&mut rng, 3), 1 + below(&mut rng, 3));
        let mut inputs = vec![random_tensor(&[t, n], &mut rng)];
        for _ in 0..2 {
            inputs.push(random_tensor(&[4 * d, n], &mut rng));
            inputs.push(random_tensor(&[4 * d, d], &mut rng));
            inputs.push(random_tensor(&[4 * d], &mut rng));
        }
        let err = grad_check(&inputs, |tape, v| {
            let fwd = LstmParams { w_ih: v[1], w_hh: v[2], b: v[3] };
            let bwd = LstmParams { w_ih: v[4], w_hh: v[5], b: v[6] };
            let h = bilstm(tape, v[0], &fwd, &bwd)?;
            weighted_sum(tape, h, seed + 300)
        })
        .unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn attention_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let (t, d) = (1 + below(&mut rng, 5), 1 + below(&mut rng, 4));
        let inputs = [random_tensor(&[t, d], &mut rng)];
        let err = grad_check(&inputs, |tape, v| {
            let att = attention_pool(tape, v[0])?;
            weighted_sum(tape, att.pooled, seed + 400)
        })
        .unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn bce_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let z = Tensor::scalar(uniform(&mut rng, -3.0, 3.0));
        let y = (seed % 2) as f64;
        let weight = uniform(&mut rng, 0.5, 3.0);
        let err = grad_check(&[z], |tape, v| {
            let p = tape.sigmoid(v[0]);
            bce_loss(tape, p, y, weight)
        })
        .unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
        let p = Tensor::scalar(uniform(&mut rng, 0.05, 0.95));
        let err = grad_check(&[p], |tape, v| bce_loss(tape, v[0], y, weight)).unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn elementwise_and_structural_gradients() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let (m, k, n) = (1 + below(&mut rng, 4), 1 + below(&mut rng, 4), 1 + below(&mut rng, 4));
        let inputs = [
            random_tensor(&[m, k], &mut rng),
            random_tensor(&[k, n], &mut rng),
            random_tensor(&[n, k], &mut rng),
        ];
        let err = grad_check(&inputs, |tape, v| {
            let ab = tape.matmul(v[0], v[1])?;
            let ac = tape.matmul_nt(v[0], v[2])?;
            let s = tape.add(ab, ac)?;
            let s = tape.softmax_rows(s)?;
            let r = tape.relu(s);
            let th = tape.tanh(ab);
            let mixed = tape.mul(r, th)?;
            let mixed = tape.scale(mixed, 1.7);
            let mean = tape.mean_rows(mixed)?;
            let masked = tape.mul_const(mean, vec![2.0; n])?;
            let first = tape.slice(masked, 0, 1)?;
            let both = tape.concat(&[masked, first]);
            let total = tape.add_n(&[both, both])?;
            weighted_sum(tape, total, seed + 500)
        })
        .unwrap();
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn attention_rows_are_convex_weights() {
    for seed in 0..INSTANCES {
        let mut rng = prng(seed);
        let t = 1 + below(&mut rng, 8);
        let h = random_tensor(&[t, 6], &mut rng);
        let mut tape = Tape::new();
        let hv = tape.constant(h);
        let att = attention_pool(&mut tape, hv).unwrap();
        let a = tape.value(att.weights);
        for r in 0..t {
            let row = a.row(r);
            assert!(row.iter().all(|&w| (0.0..=1.0).contains(&w)));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_rows_pool_to_that_row() {
    let row = [0.2, -0.7, 1.1, 0.0];
    let h = Tensor::matrix(5, 4, row.repeat(5)).unwrap();
    let mut tape = Tape::new();
    let hv = tape.constant(h);
    let att = attention_pool(&mut tape, hv).unwrap();
    for (a, b) in tape.value(att.pooled).data().iter().zip(row) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn bilstm_single_step_shares_input() {
    let mut rng = prng(5);
    let fwd = LstmParams::init(3, 2, &mut rng);
    let x = random_tensor(&[1, 3], &mut rng);
    let mut tape = Tape::new();
    let xv = tape.constant(x);
    let f = fwd.map(|t| tape.param(t));
    let h = bilstm(&mut tape, xv, &f, &f).unwrap();
    let out = tape.value(h).data();
    assert_eq!(&out[..2], &out[2..]);
}

#[test]
fn forward_is_deterministic() {
    let run = || {
        let mut rng = prng(11);
        let p = LstmParams::init(4, 3, &mut rng);
        let x = random_tensor(&[6, 4], &mut rng);
        let mut tape = Tape::new();
        let xv = tape.constant(x);
        let pv = p.map(|t| tape.param(t));
        let h = bilstm(&mut tape, xv, &pv, &pv).unwrap();
        let att = attention_pool(&mut tape, h).unwrap();
        tape.value(att.pooled).data().to_vec()
    };
    assert_eq!(run(), run());
}

#[test]
fn adam_trajectories_reproducible() {
    let run = || {
        let mut rng = prng(3);
        let mut p: Vec<f64> = (0..8).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let mut state = AdamState::new(8);
        let cfg = AdamConfig::with_lr(0.05);
        for _ in 0..50 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * (x - 0.3)).collect();
            adam_step(&mut p, &g, &mut state, &cfg);
        }
        p
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.iter().all(|x| (x - 0.3).abs() < 0.2));
}
