use rand::Rng;

/// Fully connected ReLU network with one linear output unit.
///
/// Parameters live in one flat vector. For each layer the weights come
/// first, row-major with one row per output unit, followed by the biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Reusable forward/backward buffers.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    // Pre-activations and activations per layer; acts[0] is the input.
    pre: Vec<Vec<f64>>,
    acts: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Mlp {
    /// `sizes` = [inputs, hidden..., 1].
    pub fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Weights uniform in ±sqrt(6 / (fan_in + fan_out)), biases zero.
    pub fn init<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(
            sizes.len() >= 2 && *sizes.last().unwrap() == 1,
            "network must end in one output"
        );
        let mut params = Vec::with_capacity(Self::param_count(sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-limit..=limit));
            }
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Mlp {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>) -> Option<Self> {
        (sizes.len() >= 2 && sizes.last() == Some(&1) && params.len() == Self::param_count(&sizes))
            .then_some(Mlp { sizes, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offset of layer `l`'s weights in the flat parameter vector.
    pub fn layer_offset(&self, l: usize) -> usize {
        Self::param_count(&self.sizes[..=l])
    }

    /// Weights and bias of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let off = self.layer_offset(l);
        let w = &self.params[off..off + n_in * n_out];
        let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
        (w, b)
    }

    fn prepare(&self, ws: &mut Workspace) {
        if ws.acts.len() != self.sizes.len() {
            ws.acts = self.sizes.iter().map(|&n| vec![0.0; n]).collect();
            ws.pre = self.sizes.iter().map(|&n| vec![0.0; n]).collect();
            ws.delta = self.sizes.iter().map(|&n| vec![0.0; n]).collect();
        }
    }

    fn forward_ws(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        debug_assert_eq!(x.len(), self.sizes[0]);
        self.prepare(ws);
        ws.acts[0].copy_from_slice(x);
        let last = self.sizes.len() - 2;
        for l in 0..=last {
            let (w, b) = self.layer(l);
            let n_in = self.sizes[l];
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            for (j, o) in out.iter_mut().enumerate() {
                let row = &w[j * n_in..(j + 1) * n_in];
                let z = row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + b[j];
                ws.pre[l + 1][j] = z;
                *o = if l == last { z } else { z.max(0.0) };
            }
        }
        ws.acts[last + 1][0]
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        self.forward_ws(x, &mut Workspace::default())
    }

    /// Mean squared error over a set of examples.
    pub fn loss(&self, xs: &[&[f64]], ys: &[f64]) -> f64 {
        let mut ws = Workspace::default();
        let sum: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let d = self.forward_ws(x, &mut ws) - y;
                d * d
            })
            .sum();
        sum / xs.len() as f64
    }

    /// Mean squared error over the batch and its gradient with respect to
    /// every parameter. `grad` is overwritten.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[f64], grad: &mut [f64], ws: &mut Workspace) -> f64 {
        assert_eq!(grad.len(), self.params.len());
        assert_eq!(xs.len(), ys.len());
        grad.fill(0.0);
        let n = xs.len() as f64;
        let last = self.sizes.len() - 2;
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let out = self.forward_ws(x, ws);
            let diff = out - y;
            loss += diff * diff;
            ws.delta[last + 1][0] = 2.0 * diff / n;
            for l in (0..=last).rev() {
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let off = self.layer_offset(l);
                let w = &self.params[off..off + n_in * n_out];
                let (d_lo, d_hi) = ws.delta.split_at_mut(l + 1);
                let d_out = &d_hi[0];
                let input = &ws.acts[l];
                for j in 0..n_out {
                    let d = d_out[j];
                    if d == 0.0 {
                        continue;
                    }
                    let g = &mut grad[off + j * n_in..off + (j + 1) * n_in];
                    for (gi, a) in g.iter_mut().zip(input) {
                        *gi += d * a;
                    }
                    grad[off + n_in * n_out + j] += d;
                }
                if l > 0 {
                    let d_in = &mut d_lo[l];
                    for (i, di) in d_in.iter_mut().enumerate() {
                        *di = if ws.pre[l][i] > 0.0 {
                            (0..n_out).map(|j| w[j * n_in + i] * d_out[j]).sum()
                        } else {
                            0.0
                        };
                    }
                }
            }
        }
        loss / n
    }

    /// Pre-activations of every hidden unit for `x`.
    pub fn hidden_preactivations(&self, x: &[f64]) -> Vec<f64> {
        let mut ws = Workspace::default();
        self.forward_ws(x, &mut ws);
        ws.pre[1..self.sizes.len() - 1].iter().flatten().copied().collect()
    }
}

/// Adam optimizer state.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_and_init() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Mlp::init(&[3, 32, 32, 1], &mut rng);
        assert_eq!(m.params().len(), 3 * 32 + 32 + 32 * 32 + 32 + 32 + 1);
        let (w, b) = m.layer(0);
        let limit = (6.0f64 / 35.0).sqrt();
        assert!(w.iter().all(|x| x.abs() <= limit));
        assert!(b.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn forward_by_hand() {
        // 2 -> 2 -> 1 with hand-picked weights.
        let params = vec![1.0, -1.0, 0.5, 0.5, 0.0, -1.0, 2.0, 3.0, 0.25];
        let m = Mlp::from_parts(vec![2, 2, 1], params).unwrap();
        // h = relu([x0 - x1, 0.5 x0 + 0.5 x1 - 1]); out = 2 h0 + 3 h1 + 0.25
        assert_eq!(m.forward(&[3.0, 1.0]), 2.0 * 2.0 + 3.0 * 1.0 + 0.25);
        assert_eq!(m.forward(&[0.0, 1.0]), 0.25);
    }

    #[test]
    fn adam_descends_quadratic() {
        let mut p = vec![3.0, -2.0];
        let mut opt = Adam::new(2, 0.1);
        for _ in 0..500 {
            let g = vec![2.0 * p[0], 2.0 * p[1]];
            opt.step(&mut p, &g);
        }
        assert!(p[0].abs() < 1e-2 && p[1].abs() < 1e-2, "{p:?}");
    }
}
