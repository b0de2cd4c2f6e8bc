use super::{NdError, Tape, Tensor, Var};

/// Central-difference step.
pub const GRAD_CHECK_STEP: f64 = 1e-5;

fn evaluate<F>(inputs: &[Tensor], f: &F) -> Result<f64, NdError>
where
    F: Fn(&mut Tape<'_>, &[Var]) -> Result<Var, NdError>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t)).collect();
    let out = f(&mut tape, &vars)?;
    Ok(tape.value(out).item())
}

/// Largest coordinate-wise relative error between the reverse-mode gradient
/// of the scalar `f` and central differences, over every entry of every
/// input. Each error is `|a - n| / max(1, |a|, |n|)`.
pub fn grad_check<F>(inputs: &[Tensor], f: F) -> Result<f64, NdError>
where
    F: Fn(&mut Tape<'_>, &[Var]) -> Result<Var, NdError>,
{
    let analytic: Vec<Vec<f64>> = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t)).collect();
        let out = f(&mut tape, &vars)?;
        let grads = tape.backward(out)?;
        vars.iter()
            .zip(inputs)
            .map(|(&v, t)| grads.get_or_zeros(v, t.len()))
            .collect()
    };
    let mut worst = 0.0f64;
    let mut probe = inputs.to_vec();
    for (i, grad) in analytic.iter().enumerate() {
        for (j, &a) in grad.iter().enumerate() {
            let original = probe[i].data()[j];
            probe[i].data_mut()[j] = original + GRAD_CHECK_STEP;
            let plus = evaluate(&probe, &f)?;
            probe[i].data_mut()[j] = original - GRAD_CHECK_STEP;
            let minus = evaluate(&probe, &f)?;
            probe[i].data_mut()[j] = original;
            let numeric = (plus - minus) / (2.0 * GRAD_CHECK_STEP);
            let err = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
