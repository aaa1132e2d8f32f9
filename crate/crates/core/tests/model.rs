mod common;

use common::*;
use spnet::corpus::{Role, SOS, UNK};
use spnet::model::network::encode_stream;
use spnet::model::{Example, ModelParams, NetworkStepper, Param, StepModel};
use spnet::numcore::{Graph, Tensor};
use spnet::train::example_loss;

/// Plain-loop forward pass used as an oracle for the graph implementation.
struct Scalar<'a> {
    p: &'a ModelParams<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

impl Scalar<'_> {
    fn mat(&self, p: Param) -> (&[f64], usize) {
        let t = self.p.get(p);
        (t.data(), *t.shape().last().unwrap())
    }

    fn mv(&self, p: Param, x: &[f64]) -> Vec<f64> {
        let (w, cols) = self.mat(p);
        assert_eq!(cols, x.len());
        w.chunks(cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn vec(&self, p: Param) -> Vec<f64> {
        self.p.get(p).data().to_vec()
    }

    fn embed(&self, id: usize) -> Vec<f64> {
        let (e, cols) = self.mat(Param::Embedding);
        let rows = e.len() / cols;
        let id = if id < rows { id } else { UNK };
        e[id * cols..(id + 1) * cols].to_vec()
    }

    fn lstm(&self, w: Param, b: Param, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = h.len();
        let xh: Vec<f64> = x.iter().chain(h).cloned().collect();
        let z: Vec<f64> = self.mv(w, &xh).iter().zip(self.vec(b)).map(|(a, b)| a + b).collect();
        let mut h2 = vec![0.0; n];
        let mut c2 = vec![0.0; n];
        for k in 0..n {
            let (i, f, g, o) = (sigmoid(z[k]), sigmoid(z[n + k]), z[2 * n + k].tanh(), sigmoid(z[3 * n + k]));
            c2[k] = f * c[k] + i * g;
            h2[k] = o * c2[k].tanh();
        }
        (h2, c2)
    }

    /// Per-position states `fwd ‖ bwd` and the final state.
    fn encode(&self, role: Role, ids: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let enc = Param::encoder(role);
        let hd = self.p.get(enc.fwd_b).len() / 4;
        let run = |w, b, order: Vec<usize>| {
            let (mut h, mut c) = (vec![0.0; hd], vec![0.0; hd]);
            let mut out = vec![vec![]; ids.len()];
            for i in order {
                (h, c) = self.lstm(w, b, &self.embed(ids[i]), &h, &c);
                out[i] = h.clone();
            }
            out
        };
        let n = ids.len();
        let f = run(enc.fwd_w, enc.fwd_b, (0..n).collect());
        let b = run(enc.bwd_w, enc.bwd_b, (0..n).rev().collect());
        let states = (0..n).map(|i| [f[i].clone(), b[i].clone()].concat()).collect();
        (states, [f[n - 1].clone(), b[0].clone()].concat())
    }

    fn attend(&self, role: Role, states: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
        let a = Param::attention(role);
        let ws = self.mv(a.w_s, s);
        let (v, b) = (self.vec(a.v), self.vec(a.b));
        let e: Vec<f64> = states
            .iter()
            .map(|h| {
                let wh = self.mv(a.w_h, h);
                (0..v.len()).map(|k| v[k] * (wh[k] + ws[k] + b[k]).tanh()).sum()
            })
            .collect();
        softmax(&e)
    }

    /// Teacher-forced distributions for every target position.
    fn distributions(&self, ex: &Example) -> Vec<Vec<f64>> {
        let (hu, fu) = self.encode(Role::User, &ex.user_ids);
        let (hs, fs) = self.encode(Role::System, &ex.system_ids);
        let mut s = [fu, fs].concat();
        let mut c = vec![0.0; s.len()];
        let mut input = SOS;
        let mut out = Vec::new();
        for &t in &ex.target_ids {
            let x = self.embed(input);
            (s, c) = self.lstm(Param::DecoderW, Param::DecoderB, &x, &s, &c);
            let au = self.attend(Role::User, &hu, &s);
            let asys = self.attend(Role::System, &hs, &s);
            let ctx = |a: &[f64], h: &[Vec<f64>]| -> Vec<f64> {
                (0..h[0].len()).map(|k| a.iter().zip(h).map(|(w, row)| w * row[k]).sum()).collect()
            };
            let context = [ctx(&au, &hu), ctx(&asys, &hs)].concat();
            let dot = |p: Param, x: &[f64]| self.vec(p).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            let p_gen = sigmoid(dot(Param::PtrWContext, &context) + dot(Param::PtrWState, &s) + dot(Param::PtrWInput, &x) + self.vec(Param::PtrB)[0]);
            let sh: Vec<f64> = s.iter().chain(&context).cloned().collect();
            let hidden: Vec<f64> = self.mv(Param::OutV, &sh).iter().zip(self.vec(Param::OutB)).map(|(a, b)| a + b).collect();
            let logits: Vec<f64> = self.mv(Param::OutV2, &hidden).iter().zip(self.vec(Param::OutB2)).map(|(a, b)| a + b).collect();
            let pv = softmax(&logits);
            let mut dist = vec![0.0; ex.extended_size()];
            for (w, p) in pv.iter().enumerate() {
                dist[w] += p_gen * p;
            }
            for (a, ids) in [(&au, &ex.user_ids), (&asys, &ex.system_ids)] {
                for (w, &id) in a.iter().zip(ids) {
                    dist[id] += (1.0 - p_gen) * 0.5 * w;
                }
            }
            out.push(dist);
            input = t;
        }
        out
    }
}

fn network_distributions(params: &ModelParams<f64>, ex: &Example) -> Vec<Vec<f64>> {
    let mut st = NetworkStepper::new(params, ex).unwrap();
    let mut state = st.start().unwrap();
    let mut input = SOS;
    let mut out = Vec::new();
    for &t in &ex.target_ids {
        let (trace, next) = st.step(&state, input).unwrap();
        out.push(trace.distribution);
        state = next;
        input = t;
    }
    out
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).flat_map(|(x, y)| {
        assert_eq!(x.len(), y.len());
        x.iter().zip(y).map(|(p, q)| (p - q).abs())
    })
    .fold(0.0, f64::max)
}

#[test]
fn encoder_matches_scalar_lstm() {
    let cfg = tiny_config();
    for seed in 0..5 {
        let params = random_params::<f64>(&cfg, seed, 0.5);
        let ex = random_example(50 + seed, cfg.vocab_size, 2, cfg.num_domains);
        let oracle = Scalar { p: &params };
        for (role, ids) in [(Role::User, &ex.user_ids), (Role::System, &ex.system_ids)] {
            let mut g = Graph::new(params.tensors());
            let enc = encode_stream(&mut g, Param::encoder(role), ids, ex.base_size, ex.extended_size()).unwrap();
            let (states, last) = oracle.encode(role, ids);
            let got = g.value(enc.states);
            assert_eq!(got.shape(), &[ids.len(), cfg.encoder_hidden]);
            for (a, b) in got.data().iter().zip(states.concat()) {
                assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in g.value(enc.final_state).data().iter().zip(last) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn decoder_steps_match_scalar_composition() {
    let cfg = tiny_config();
    for seed in 0..5 {
        let params = random_params::<f64>(&cfg, 10 + seed, 0.5);
        let ex = random_example(70 + seed, cfg.vocab_size, 3, cfg.num_domains);
        let want = Scalar { p: &params }.distributions(&ex);
        let got = network_distributions(&params, &ex);
        assert!(max_diff(&want, &got) < 1e-12, "seed {seed}");
    }
}

/// Swap index halves of a vector of even length.
fn half_swap(i: usize, n: usize) -> usize {
    (i + n / 2) % n
}

/// Parameters that make the network treat the system stream as the user
/// stream and vice versa.
fn role_swapped(params: &ModelParams<f64>) -> ModelParams<f64> {
    let cfg = *params.config();
    let (e, hs) = (cfg.embed_dim, cfg.decoder_hidden);
    let he2 = 2 * cfg.encoder_hidden;
    let t = |p: Param| params.get(p).clone();
    let map = |p: Param, f: &dyn Fn(usize, usize) -> (usize, usize)| {
        let src = params.get(p);
        let (rows, cols) = (src.shape()[0], src.len() / src.shape()[0]);
        let mut data = vec![0.0; src.len()];
        for r in 0..rows {
            for c in 0..cols {
                let (r2, c2) = f(r, c);
                data[r * cols + c] = src.data()[r2 * cols + c2];
            }
        }
        Tensor::new(src.shape().to_vec(), data).unwrap()
    };
    let gate_rows = |r: usize| (r / hs) * hs + half_swap(r % hs, hs);
    let state_cols = |c: usize| if c < e { c } else { e + half_swap(c - e, hs) };
    let tensors = Param::ALL
        .iter()
        .map(|&p| match p {
            Param::UserFwdW => t(Param::SysFwdW),
            Param::UserFwdB => t(Param::SysFwdB),
            Param::UserBwdW => t(Param::SysBwdW),
            Param::UserBwdB => t(Param::SysBwdB),
            Param::SysFwdW => t(Param::UserFwdW),
            Param::SysFwdB => t(Param::UserFwdB),
            Param::SysBwdW => t(Param::UserBwdW),
            Param::SysBwdB => t(Param::UserBwdB),
            Param::DecoderW => map(p, &|r, c| (gate_rows(r), state_cols(c))),
            Param::DecoderB => map(p, &|r, _| (gate_rows(r), 0)),
            Param::UserAttnWh => t(Param::SysAttnWh),
            Param::UserAttnV => t(Param::SysAttnV),
            Param::UserAttnB => t(Param::SysAttnB),
            Param::SysAttnWh => t(Param::UserAttnWh),
            Param::SysAttnV => t(Param::UserAttnV),
            Param::SysAttnB => t(Param::UserAttnB),
            Param::UserAttnWs => {
                let sys = params.get(Param::SysAttnWs);
                let cols = hs;
                let data = (0..sys.len()).map(|i| sys.data()[(i / cols) * cols + half_swap(i % cols, cols)]).collect();
                Tensor::new(sys.shape().to_vec(), data).unwrap()
            }
            Param::SysAttnWs => {
                let usr = params.get(Param::UserAttnWs);
                let cols = hs;
                let data = (0..usr.len()).map(|i| usr.data()[(i / cols) * cols + half_swap(i % cols, cols)]).collect();
                Tensor::new(usr.shape().to_vec(), data).unwrap()
            }
            Param::PtrWContext => map(p, &|r, _| (half_swap(r, he2), 0)),
            Param::PtrWState => map(p, &|r, _| (half_swap(r, hs), 0)),
            Param::OutV => map(p, &|r, c| (r, if c < hs { half_swap(c, hs) } else { hs + half_swap(c - hs, he2) })),
            Param::ClsU => map(p, &|r, c| (r, half_swap(c, he2))),
            other => t(other),
        })
        .collect();
    ModelParams::from_tensors(cfg, tensors).unwrap()
}

#[test]
fn swapping_roles_and_weights_leaves_the_output_unchanged() {
    let cfg = tiny_config();
    for seed in 0..5 {
        let params = random_params::<f64>(&cfg, 20 + seed, 0.5);
        // base-vocabulary ids only, so extension ids do not depend on stream order
        let ex = random_example(90 + seed, cfg.vocab_size, 0, cfg.num_domains);
        let swapped_ex = Example { user_ids: ex.system_ids.clone(), system_ids: ex.user_ids.clone(), ..ex.clone() };
        let swapped = role_swapped(&params);
        let d = max_diff(&network_distributions(&params, &ex), &network_distributions(&swapped, &swapped_ex));
        assert!(d < 1e-12, "seed {seed}: {d}");
        let loss = |p: &ModelParams<f64>, e: &Example| {
            let mut g = Graph::new(p.tensors());
            let l = example_loss(&mut g, e, 0.5).unwrap();
            g.value(l.total).data()[0]
        };
        assert!((loss(&params, &ex) - loss(&swapped, &swapped_ex)).abs() < 1e-12);
        // the swap is not the identity
        assert!(max_diff(&network_distributions(&params, &ex), &network_distributions(&params, &swapped_ex)) > 1e-6);
    }
}
