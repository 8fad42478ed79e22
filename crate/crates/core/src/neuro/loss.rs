//! Effect-supervised loss: Jensen-Shannon invariance on unaffected atoms plus
//! cross-entropy flips on affected atoms.

pub const DEFAULT_EPS: f64 = 1e-7;

fn clamp(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// Binary entropy with 0 ln 0 = 0, so a clamp that rounds to 1.0 stays finite.
fn h(p: f64) -> f64 {
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    -(xlnx(p) + xlnx(1.0 - p))
}

/// Jensen-Shannon divergence between Bernoulli(p) and Bernoulli(q), in nats.
pub fn js_bernoulli(p: f64, q: f64) -> f64 {
    js_bernoulli_eps(p, q, DEFAULT_EPS)
}

pub fn js_bernoulli_eps(p: f64, q: f64, eps: f64) -> f64 {
    let (p, q) = (clamp(p, eps), clamp(q, eps));
    let m = 0.5 * (p + q);
    (h(m) - 0.5 * (h(p) + h(q))).max(0.0)
}

/// d JS / d p at clamped inputs.
fn djs_dp(p: f64, q: f64) -> f64 {
    let m = 0.5 * (p + q);
    0.5 * (((1.0 - m) / m).ln() - ((1.0 - p) / p).ln())
}

pub fn cross_entropy(p: f64, y: f64, eps: f64) -> f64 {
    let p = clamp(p, eps);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Loss of one transition from pre/post atom probabilities and the ground effect vector.
pub fn transition_loss(pre: &[f64], post: &[f64], t: &[i8], eps: f64) -> f64 {
    transition_loss_grad(pre, post, t, eps, None)
}

/// Same value as `transition_loss`; when `grad` is given, writes d loss / d logit
/// for every pre atom then every post atom (length `2P`). The probabilities must be
/// logistic outputs so that dp/dlogit = p(1-p); clamped entries get zero gradient.
pub fn transition_loss_grad(pre: &[f64], post: &[f64], t: &[i8], eps: f64, mut grad: Option<&mut [f64]>) -> f64 {
    let n = t.len();
    assert!(pre.len() == n && post.len() == n);
    let n_zero = t.iter().filter(|&&v| v == 0).count();
    let n_one = n - n_zero;
    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut zero = 0.0;
    let mut one = 0.0;
    for i in 0..n {
        let (p, q) = (pre[i], post[i]);
        let (pc, qc) = (clamp(p, eps), clamp(q, eps));
        let live = |x: f64| x > eps && x < 1.0 - eps;
        if t[i] == 0 {
            zero += js_bernoulli_eps(p, q, eps);
            if let Some(g) = grad.as_deref_mut() {
                let w = 1.0 / n_zero as f64;
                if live(p) {
                    g[i] = w * djs_dp(pc, qc) * pc * (1.0 - pc);
                }
                if live(q) {
                    g[n + i] = w * djs_dp(qc, pc) * qc * (1.0 - qc);
                }
            }
        } else {
            let y_pre = (1.0 - t[i] as f64) / 2.0;
            let y_post = (1.0 + t[i] as f64) / 2.0;
            one += 0.5 * (cross_entropy(p, y_pre, eps) + cross_entropy(q, y_post, eps));
            if let Some(g) = grad.as_deref_mut() {
                let w = 0.5 / n_one as f64;
                if live(p) {
                    g[i] = w * (pc - y_pre);
                }
                if live(q) {
                    g[n + i] = w * (qc - y_post);
                }
            }
        }
    }
    let zero = if n_zero > 0 { zero / n_zero as f64 } else { 0.0 };
    let one = if n_one > 0 { one / n_one as f64 } else { 0.0 };
    zero + one
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn js_identities() {
        assert_eq!(js_bernoulli(0.3, 0.3), 0.0);
        assert!((js_bernoulli(0.2, 0.9) - js_bernoulli(0.9, 0.2)).abs() < 1e-15);
        // Hand value: at the clamp limit JS(1,0) = H(1/2) = ln 2 up to O(eps ln eps).
        assert!((js_bernoulli(1.0, 0.0) - LN2).abs() < 1e-5);
    }

    #[test]
    fn hand_computed_transition_losses() {
        assert_eq!(transition_loss(&[0.4, 0.8], &[0.4, 0.8], &[0, 0], DEFAULT_EPS), 0.0);
        // t = -1, both predictions 0.5: mean of two cross-entropies at 0.5 is ln 2.
        assert!((transition_loss(&[0.5], &[0.5], &[-1], DEFAULT_EPS) - LN2).abs() < 1e-12);
        let perfect = transition_loss(&[0.0], &[1.0], &[1], DEFAULT_EPS);
        assert!(perfect < 1e-6);
    }

    #[test]
    fn tiny_clamp_keeps_boundary_entropy_finite() {
        // 1 - 1e-300 rounds to 1.0, which used to turn H into NaN and JS into 0.
        assert!((js_bernoulli_eps(1.0, 0.0, 1e-300) - LN2).abs() < 1e-12);
    }
}
