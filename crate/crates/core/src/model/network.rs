//! Graph construction for the network. Each function adds nodes to a
//! [`Graph`] and returns their ids, so the same code serves training,
//! inference and gradient checks.

use crate::numcore::{Graph, NodeId, Real, Tensor};

use super::params::{AttentionParams, EncoderParams, Param};
use super::trace::DecoderStepTrace;
use super::{ModelError, ModelResult};

/// Probability vectors must sum to one within this tolerance.
pub fn normalization_tolerance<T: Real>() -> f64 {
    (1e3 * T::epsilon().as_f64()).max(1e-6)
}

fn check_normalized<T: Real>(g: &Graph<'_, T>, id: NodeId, what: &str) -> ModelResult<()> {
    let s: f64 = g.value(id).data().iter().map(|x| x.as_f64()).sum();
    if (s - 1.0).abs() > normalization_tolerance::<T>() {
        return Err(ModelError::Contract(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

/// One LSTM step on packed weights `w: [4H, d_in + H]`, gates ordered
/// input, forget, candidate, output.
pub fn lstm_cell<T: Real>(
    g: &mut Graph<'_, T>,
    x: NodeId,
    h: NodeId,
    c: NodeId,
    w: NodeId,
    b: NodeId,
) -> ModelResult<(NodeId, NodeId)> {
    let hidden = g.value(c).len();
    let xh = g.concat(&[x, h])?;
    let wx = g.matvec(w, xh)?;
    let z = g.add(wx, b)?;
    let zi = g.slice(z, 0, hidden)?;
    let zf = g.slice(z, hidden, hidden)?;
    let zg = g.slice(z, 2 * hidden, hidden)?;
    let zo = g.slice(z, 3 * hidden, hidden)?;
    let i = g.sigmoid(zi);
    let f = g.sigmoid(zf);
    let cand = g.tanh(zg);
    let o = g.sigmoid(zo);
    let fc = g.mul(f, c)?;
    let ig = g.mul(i, cand)?;
    let c_new = g.add(fc, ig)?;
    let tc = g.tanh(c_new);
    let h_new = g.mul(o, tc)?;
    Ok((h_new, c_new))
}

/// Hidden states of one role's bidirectional encoder.
#[derive(Debug, Clone)]
pub struct EncodedStream {
    /// `[n, encoder_hidden]`, row i = forward_i ‖ backward_i.
    pub states: NodeId,
    /// Final forward state ‖ final backward state.
    pub final_state: NodeId,
    /// Source ids under the extended vocabulary.
    pub ids: Vec<usize>,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct EncodedDialog {
    pub user: EncodedStream,
    pub system: EncodedStream,
    pub extended_size: usize,
}

/// Runs one bidirectional encoder. `ids` are extended-vocabulary ids;
/// anything at or past `base_size` is embedded as UNK.
pub fn encode_stream<T: Real>(
    g: &mut Graph<'_, T>,
    enc: EncoderParams,
    ids: &[usize],
    base_size: usize,
    extended_size: usize,
) -> ModelResult<EncodedStream> {
    if ids.is_empty() {
        return Err(ModelError::Contract("empty source stream".into()));
    }
    if let Some(&bad) = ids.iter().find(|&&i| i >= extended_size) {
        return Err(ModelError::Contract(format!("token id {bad} outside extended vocabulary of {extended_size}")));
    }
    let emb = g.param(Param::Embedding.index());
    let inputs: Vec<NodeId> = ids
        .iter()
        .map(|&id| g.row(emb, if id < base_size { id } else { crate::corpus::UNK }))
        .collect::<Result<_, _>>()?;
    let fwd_b = g.param(enc.fwd_b.index());
    let hidden = g.value(fwd_b).len() / 4;
    let run = |g: &mut Graph<'_, T>, order: &mut dyn Iterator<Item = usize>, w: Param, b: Param| -> ModelResult<Vec<(usize, NodeId)>> {
        let (w, b) = (g.param(w.index()), g.param(b.index()));
        let mut h = g.input(Tensor::zeros(&[hidden]));
        let mut c = g.input(Tensor::zeros(&[hidden]));
        let mut out = Vec::new();
        for i in order {
            (h, c) = lstm_cell(g, inputs[i], h, c, w, b)?;
            out.push((i, h));
        }
        Ok(out)
    };
    let n = ids.len();
    let fwd = run(g, &mut (0..n), enc.fwd_w, enc.fwd_b)?;
    let mut bwd = run(g, &mut (0..n).rev(), enc.bwd_w, enc.bwd_b)?;
    let final_state = g.concat(&[fwd[n - 1].1, bwd[n - 1].1])?;
    bwd.reverse();
    let rows: Vec<NodeId> = fwd
        .iter()
        .zip(&bwd)
        .map(|(&(_, f), &(_, b))| g.concat(&[f, b]))
        .collect::<Result<_, _>>()?;
    let states = g.stack(&rows)?;
    Ok(EncodedStream { states, final_state, ids: ids.to_vec(), mask: vec![true; n] })
}

/// Encodes the user stream and the system stream with their own encoders.
pub fn encode_dialog<T: Real>(
    g: &mut Graph<'_, T>,
    user_ids: &[usize],
    system_ids: &[usize],
    base_size: usize,
    extended_size: usize,
) -> ModelResult<EncodedDialog> {
    use crate::corpus::Role;
    let user = encode_stream(g, Param::encoder(Role::User), user_ids, base_size, extended_size)?;
    let system = encode_stream(g, Param::encoder(Role::System), system_ids, base_size, extended_size)?;
    Ok(EncodedDialog { user, system, extended_size })
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionNodes {
    pub w_h: NodeId,
    pub w_s: NodeId,
    pub v: NodeId,
    pub b: NodeId,
}

impl AttentionNodes {
    pub fn from_params<T: Real>(g: &mut Graph<'_, T>, p: AttentionParams) -> Self {
        AttentionNodes { w_h: g.param(p.w_h.index()), w_s: g.param(p.w_s.index()), v: g.param(p.v.index()), b: g.param(p.b.index()) }
    }
}

/// `W_h h_i` for every source position, computed once per dialog.
pub fn attention_keys<T: Real>(g: &mut Graph<'_, T>, states: NodeId, attn: &AttentionNodes) -> ModelResult<NodeId> {
    Ok(g.matmul_t(states, attn.w_h)?)
}

#[derive(Debug, Clone, Copy)]
pub struct Attention {
    pub energies: NodeId,
    pub weights: NodeId,
}

/// `e_i = vᵀ tanh(W_h h_i + W_s s_t + b)`, softmax over unmasked positions.
pub fn attend<T: Real>(
    g: &mut Graph<'_, T>,
    s_t: NodeId,
    keys: NodeId,
    mask: &[bool],
    attn: &AttentionNodes,
) -> ModelResult<Attention> {
    if !mask.iter().any(|&m| m) {
        return Err(ModelError::Contract("attention over a fully masked source".into()));
    }
    let ws = g.matvec(attn.w_s, s_t)?;
    let q = g.add(ws, attn.b)?;
    let pre = g.add_row(keys, q)?;
    let act = g.tanh(pre);
    let energies = g.matvec(act, attn.v)?;
    let weights = g.masked_softmax(energies, Some(mask))?;
    Ok(Attention { energies, weights })
}

/// `h* = (Σ a_usr_i h_usr_i) ‖ (Σ a_sys_i h_sys_i)`.
pub fn merge_context<T: Real>(
    g: &mut Graph<'_, T>,
    a_usr: NodeId,
    h_usr: NodeId,
    a_sys: NodeId,
    h_sys: NodeId,
) -> ModelResult<NodeId> {
    let cu = g.matvec_t(h_usr, a_usr)?;
    let cs = g.matvec_t(h_sys, a_sys)?;
    Ok(g.concat(&[cu, cs])?)
}

#[derive(Debug, Clone, Copy)]
pub struct DecoderState {
    pub s: NodeId,
    pub c: NodeId,
}

/// `s_0 = h_T_usr ‖ h_T_sys`, cell state zero.
pub fn init_decoder_state<T: Real>(
    g: &mut Graph<'_, T>,
    final_usr: NodeId,
    final_sys: NodeId,
    decoder_hidden: usize,
) -> ModelResult<DecoderState> {
    let s = g.concat(&[final_usr, final_sys])?;
    let got = g.value(s).len();
    if got != decoder_hidden {
        return Err(ModelError::Config(format!(
            "concatenated encoder states have {got} dims, decoder expects {decoder_hidden}"
        )));
    }
    let c = g.input(Tensor::zeros(&[decoder_hidden]));
    Ok(DecoderState { s, c })
}

#[derive(Debug, Clone, Copy)]
pub struct PointerNodes {
    pub w_context: NodeId,
    pub w_state: NodeId,
    pub w_input: NodeId,
    pub b: NodeId,
}

impl PointerNodes {
    pub fn from_params<T: Real>(g: &mut Graph<'_, T>) -> Self {
        PointerNodes {
            w_context: g.param(Param::PtrWContext.index()),
            w_state: g.param(Param::PtrWState.index()),
            w_input: g.param(Param::PtrWInput.index()),
            b: g.param(Param::PtrB.index()),
        }
    }
}

/// `p_gen = σ(w_ctxᵀ h* + w_sᵀ s_t + w_xᵀ x_t + b)`.
pub fn generation_prob<T: Real>(
    g: &mut Graph<'_, T>,
    h_star: NodeId,
    s_t: NodeId,
    x_t: NodeId,
    ptr: &PointerNodes,
) -> ModelResult<NodeId> {
    let a = g.dot(ptr.w_context, h_star)?;
    let b = g.dot(ptr.w_state, s_t)?;
    let c = g.dot(ptr.w_input, x_t)?;
    let ab = g.add(a, b)?;
    let abc = g.add(ab, c)?;
    let z = g.add(abc, ptr.b)?;
    Ok(g.sigmoid(z))
}

/// `P(w) = p_gen P_vocab(w) + (1 − p_gen) Σ_{i: w_i = w} ā_i` over the
/// extended vocabulary, with `ā` the equal-weight average of the two
/// per-encoder attention distributions.
#[allow(clippy::too_many_arguments)]
pub fn final_distribution<T: Real>(
    g: &mut Graph<'_, T>,
    p_vocab: NodeId,
    p_gen: NodeId,
    a_usr: NodeId,
    ids_usr: &[usize],
    a_sys: NodeId,
    ids_sys: &[usize],
    extended_size: usize,
) -> ModelResult<NodeId> {
    check_normalized(g, p_vocab, "P_vocab")?;
    check_normalized(g, a_usr, "user attention")?;
    check_normalized(g, a_sys, "system attention")?;
    let gen = g.pad_to(p_vocab, extended_size)?;
    let attn = g.concat(&[a_usr, a_sys])?;
    let ids: Vec<usize> = ids_usr.iter().chain(ids_sys).copied().collect();
    let copy_sum = g.scatter_add(attn, &ids, extended_size)?;
    let copy = g.affine(copy_sum, T::from_f64(0.5), T::zero());
    let one_minus = g.affine(p_gen, -T::one(), T::one());
    let gen_part = g.scale_by(gen, p_gen)?;
    let copy_part = g.scale_by(copy, one_minus)?;
    Ok(g.add(gen_part, copy_part)?)
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifierNodes {
    pub u: NodeId,
    pub b: NodeId,
    pub u2: NodeId,
    pub b2: NodeId,
}

impl ClassifierNodes {
    pub fn from_params<T: Real>(g: &mut Graph<'_, T>) -> Self {
        ClassifierNodes {
            u: g.param(Param::ClsU.index()),
            b: g.param(Param::ClsB.index()),
            u2: g.param(Param::ClsU2.index()),
            b2: g.param(Param::ClsB2.index()),
        }
    }
}

/// `d = σ(U'(ReLU(U [h_T_usr ‖ h_T_sys] + b_d)) + b_d')`.
pub fn classify_domains<T: Real>(
    g: &mut Graph<'_, T>,
    final_usr: NodeId,
    final_sys: NodeId,
    cls: &ClassifierNodes,
) -> ModelResult<NodeId> {
    let h = g.concat(&[final_usr, final_sys])?;
    let uh = g.matvec(cls.u, h)?;
    let z = g.add(uh, cls.b)?;
    let r = g.relu(z);
    let u2 = g.matvec(cls.u2, r)?;
    let z2 = g.add(u2, cls.b2)?;
    Ok(g.sigmoid(z2))
}

/// Node ids produced by one decoder step.
#[derive(Debug, Clone, Copy)]
pub struct StepNodes {
    pub x: NodeId,
    pub state: DecoderState,
    pub user_attention: Attention,
    pub system_attention: Attention,
    pub context: NodeId,
    pub p_gen: NodeId,
    pub p_vocab: NodeId,
    pub distribution: NodeId,
}

impl StepNodes {
    pub fn trace<T: Real>(&self, g: &Graph<'_, T>) -> DecoderStepTrace {
        let v = |id: NodeId| g.value(id).to_f64_vec();
        DecoderStepTrace {
            x: v(self.x),
            s: v(self.state.s),
            user_energies: v(self.user_attention.energies),
            user_attention: v(self.user_attention.weights),
            system_energies: v(self.system_attention.energies),
            system_attention: v(self.system_attention.weights),
            context: v(self.context),
            p_gen: v(self.p_gen)[0],
            distribution: v(self.distribution),
        }
    }
}

/// Everything a decoder step needs that stays fixed across steps.
#[derive(Debug, Clone)]
pub struct DecoderContext {
    pub encoded: EncodedDialog,
    embedding: NodeId,
    lstm_w: NodeId,
    lstm_b: NodeId,
    user_attn: AttentionNodes,
    system_attn: AttentionNodes,
    user_keys: NodeId,
    system_keys: NodeId,
    pointer: PointerNodes,
    out: [NodeId; 4],
    decoder_hidden: usize,
}

impl DecoderContext {
    pub fn new<T: Real>(g: &mut Graph<'_, T>, encoded: EncodedDialog) -> ModelResult<Self> {
        use crate::corpus::Role;
        let user_attn = AttentionNodes::from_params(g, Param::attention(Role::User));
        let system_attn = AttentionNodes::from_params(g, Param::attention(Role::System));
        let user_keys = attention_keys(g, encoded.user.states, &user_attn)?;
        let system_keys = attention_keys(g, encoded.system.states, &system_attn)?;
        let lstm_b = g.param(Param::DecoderB.index());
        let decoder_hidden = g.value(lstm_b).len() / 4;
        Ok(DecoderContext {
            embedding: g.param(Param::Embedding.index()),
            lstm_w: g.param(Param::DecoderW.index()),
            lstm_b,
            user_attn,
            system_attn,
            user_keys,
            system_keys,
            pointer: PointerNodes::from_params(g),
            out: [Param::OutV, Param::OutB, Param::OutV2, Param::OutB2].map(|p| g.param(p.index())),
            decoder_hidden,
            encoded,
        })
    }

    pub fn initial_state<T: Real>(&self, g: &mut Graph<'_, T>) -> ModelResult<DecoderState> {
        init_decoder_state(g, self.encoded.user.final_state, self.encoded.system.final_state, self.decoder_hidden)
    }

    /// `input` is an extended-vocabulary id; extension ids are fed as UNK.
    pub fn step<T: Real>(&self, g: &mut Graph<'_, T>, input: usize, prev: DecoderState) -> ModelResult<StepNodes> {
        let base = g.value(self.embedding).rows();
        let input = if input < base { input } else { crate::corpus::UNK };
        let x = g.row(self.embedding, input)?;
        let (s, c) = lstm_cell(g, x, prev.s, prev.c, self.lstm_w, self.lstm_b)?;
        let enc = &self.encoded;
        let user_attention = attend(g, s, self.user_keys, &enc.user.mask, &self.user_attn)?;
        let system_attention = attend(g, s, self.system_keys, &enc.system.mask, &self.system_attn)?;
        let context = merge_context(g, user_attention.weights, enc.user.states, system_attention.weights, enc.system.states)?;
        let p_gen = generation_prob(g, context, s, x, &self.pointer)?;
        let [v, b, v2, b2] = self.out;
        let sh = g.concat(&[s, context])?;
        let hidden = g.matvec(v, sh)?;
        let hidden = g.add(hidden, b)?;
        let logits = g.matvec(v2, hidden)?;
        let logits = g.add(logits, b2)?;
        let p_vocab = g.softmax(logits)?;
        let distribution = final_distribution(
            g,
            p_vocab,
            p_gen,
            user_attention.weights,
            &enc.user.ids,
            system_attention.weights,
            &enc.system.ids,
            enc.extended_size,
        )?;
        Ok(StepNodes { x, state: DecoderState { s, c }, user_attention, system_attention, context, p_gen, p_vocab, distribution })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_in(g: &mut Graph<'_, f64>, v: &[f64]) -> NodeId {
        g.input(Tensor::vector(v.to_vec()))
    }

    fn mat_in(g: &mut Graph<'_, f64>, rows: usize, cols: usize, v: &[f64]) -> NodeId {
        g.input(Tensor::new(vec![rows, cols], v.to_vec()).unwrap())
    }

    fn attn_nodes(g: &mut Graph<'_, f64>, wh: &[f64], ws: &[f64], v: &[f64], b: &[f64], a: usize, h: usize, s: usize) -> AttentionNodes {
        AttentionNodes { w_h: mat_in(g, a, h, wh), w_s: mat_in(g, a, s, ws), v: vec_in(g, v), b: vec_in(g, b) }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn zero_v_gives_uniform_attention() {
        let mut g = Graph::new(&[]);
        let at = attn_nodes(&mut g, &[0.3, -0.2, 0.1, 0.5], &[0.2, 0.4], &[0.0, 0.0], &[0.1, 0.1], 2, 2, 1);
        let h = mat_in(&mut g, 3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let s = vec_in(&mut g, &[0.7]);
        let keys = attention_keys(&mut g, h, &at).unwrap();
        let a = attend(&mut g, s, keys, &[true, false, true], &at).unwrap();
        close(g.value(a.weights).data(), &[0.5, 0.0, 0.5], 1e-12);
        let a = attend(&mut g, s, keys, &[false, true, false], &at).unwrap();
        close(g.value(a.weights).data(), &[0.0, 1.0, 0.0], 1e-12);
        assert!(attend(&mut g, s, keys, &[false; 3], &at).is_err());
    }

    #[test]
    fn attention_matches_hand_evaluation() {
        let (wh, ws, v, b) = ([0.3, -0.2, 0.1, 0.5], [0.2, -0.4], [1.5, -0.7], [0.05, -0.1]);
        let hs = [[1.0, 2.0], [-1.0, 0.5], [0.0, 3.0]];
        let s = 0.7;
        let mut g = Graph::new(&[]);
        let at = attn_nodes(&mut g, &wh, &ws, &v, &b, 2, 2, 1);
        let h = mat_in(&mut g, 3, 2, hs.as_flattened());
        let sn = vec_in(&mut g, &[s]);
        let keys = attention_keys(&mut g, h, &at).unwrap();
        let a = attend(&mut g, sn, keys, &[true; 3], &at).unwrap();
        let e: Vec<f64> = hs
            .iter()
            .map(|hi| {
                (0..2)
                    .map(|r| v[r] * (wh[2 * r] * hi[0] + wh[2 * r + 1] * hi[1] + ws[r] * s + b[r]).tanh())
                    .sum()
            })
            .collect();
        let z: f64 = e.iter().map(|x| x.exp()).sum();
        let expect: Vec<f64> = e.iter().map(|x| x.exp() / z).collect();
        close(g.value(a.energies).data(), &e, 1e-10);
        close(g.value(a.weights).data(), &expect, 1e-10);
    }

    #[test]
    fn merge_context_cases() {
        let mut g = Graph::new(&[]);
        let h = mat_in(&mut g, 2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let hs = mat_in(&mut g, 3, 2, &[1.0, 0.0, 2.0, 5.0, -1.0, 4.0]);
        let uni = vec_in(&mut g, &[0.5, 0.5]);
        let c = merge_context(&mut g, uni, h, uni, h).unwrap();
        close(g.value(c).data(), &[1.0, 2.0, 1.0, 2.0], 1e-12);
        let one_hot = vec_in(&mut g, &[0.0, 1.0, 0.0]);
        let c = merge_context(&mut g, uni, h, one_hot, hs).unwrap();
        close(g.value(c).data(), &[1.0, 2.0, 2.0, 5.0], 1e-12);
        let w = vec_in(&mut g, &[0.2, 0.3, 0.5]);
        let c = merge_context(&mut g, uni, h, w, hs).unwrap();
        close(g.value(c).data(), &[1.0, 2.0, 0.2 + 0.6 - 0.5, 1.5 + 2.0], 1e-12);
        let bad = vec_in(&mut g, &[1.0]);
        assert!(merge_context(&mut g, bad, h, uni, h).is_err());
    }

    #[test]
    fn decoder_state_is_user_then_system() {
        let mut g = Graph::new(&[]);
        let u = vec_in(&mut g, &[1.0, 1.0]);
        let s = vec_in(&mut g, &[2.0, 2.0]);
        let st = init_decoder_state(&mut g, u, s, 4).unwrap();
        close(g.value(st.s).data(), &[1.0, 1.0, 2.0, 2.0], 0.0);
        close(g.value(st.c).data(), &[0.0; 4], 0.0);
        assert!(matches!(init_decoder_state(&mut g, u, s, 6), Err(ModelError::Config(_))));
        let z = vec_in(&mut g, &[0.0, 0.0]);
        let st = init_decoder_state(&mut g, z, z, 4).unwrap();
        close(g.value(st.s).data(), &[0.0; 4], 0.0);
    }

    #[test]
    fn generation_prob_cases() {
        let mut g = Graph::new(&[]);
        let h = vec_in(&mut g, &[0.5, -1.0]);
        let s = vec_in(&mut g, &[2.0]);
        let x = vec_in(&mut g, &[0.3, 0.1]);
        let zeros = PointerNodes { w_context: vec_in(&mut g, &[0.0, 0.0]), w_state: vec_in(&mut g, &[0.0]), w_input: vec_in(&mut g, &[0.0, 0.0]), b: vec_in(&mut g, &[0.0]) };
        let p = generation_prob(&mut g, h, s, x, &zeros).unwrap();
        assert_eq!(g.value(p).data(), &[0.5]);
        let sat = PointerNodes { b: vec_in(&mut g, &[60.0]), ..zeros };
        let p = generation_prob(&mut g, h, s, x, &sat).unwrap();
        assert!(g.value(p).data()[0] > 1.0 - 1e-12);
        let ptr = PointerNodes { w_context: vec_in(&mut g, &[0.2, 0.4]), w_state: vec_in(&mut g, &[-0.3]), w_input: vec_in(&mut g, &[1.0, 2.0]), b: vec_in(&mut g, &[0.1]) };
        let p = generation_prob(&mut g, h, s, x, &ptr).unwrap();
        let z: f64 = 0.2 * 0.5 - 0.4 - 0.6 + 0.3 + 0.2 + 0.1;
        assert!((g.value(p).data()[0] - 1.0 / (1.0 + (-z).exp())).abs() < 1e-12);
    }

    #[test]
    fn final_distribution_hand_case() {
        // Base vocabulary {a, b}, extension {c}; the user stream is "a",
        // the system stream is "c".
        let mut g = Graph::new(&[]);
        let pv = vec_in(&mut g, &[0.6, 0.4]);
        let half = vec_in(&mut g, &[0.5]);
        let au = vec_in(&mut g, &[1.0]);
        let asys = vec_in(&mut g, &[1.0]);
        let p = final_distribution(&mut g, pv, half, au, &[0], asys, &[2], 3).unwrap();
        close(g.value(p).data(), &[0.55, 0.2, 0.25], 1e-12);

        let one = vec_in(&mut g, &[1.0]);
        let p = final_distribution(&mut g, pv, one, au, &[0], asys, &[2], 3).unwrap();
        close(g.value(p).data(), &[0.6, 0.4, 0.0], 1e-12);

        let zero = vec_in(&mut g, &[0.0]);
        let a2 = vec_in(&mut g, &[0.0, 1.0]);
        let p = final_distribution(&mut g, pv, zero, a2, &[0, 2], a2, &[1, 2], 3).unwrap();
        close(g.value(p).data(), &[0.0, 0.0, 1.0], 1e-12);

        let bad = vec_in(&mut g, &[0.6, 0.6]);
        assert!(matches!(final_distribution(&mut g, bad, half, au, &[0], asys, &[2], 3), Err(ModelError::Contract(_))));
    }

    #[test]
    fn classifier_cases() {
        let mut g = Graph::new(&[]);
        let u = vec_in(&mut g, &[0.4, -0.2]);
        let s = vec_in(&mut g, &[1.0, 0.5]);
        let zero = ClassifierNodes { u: mat_in(&mut g, 3, 4, &[0.0; 12]), b: vec_in(&mut g, &[0.0; 3]), u2: mat_in(&mut g, 7, 3, &[0.0; 21]), b2: vec_in(&mut g, &[0.0; 7]) };
        let d = classify_domains(&mut g, u, s, &zero).unwrap();
        close(g.value(d).data(), &[0.5; 7], 0.0);

        let uw = [0.1, 0.2, -0.3, 0.4, -0.5, 0.6, 0.7, -0.8];
        let u2w = [1.0, -1.0, 0.5, 2.0];
        let cls = ClassifierNodes { u: mat_in(&mut g, 2, 4, &uw), b: vec_in(&mut g, &[0.05, 0.1]), u2: mat_in(&mut g, 2, 2, &u2w), b2: vec_in(&mut g, &[-0.2, 0.3]) };
        let d = classify_domains(&mut g, u, s, &cls).unwrap();
        let hin = [0.4, -0.2, 1.0, 0.5];
        let r: Vec<f64> = (0..2).map(|i| ((0..4).map(|j| uw[4 * i + j] * hin[j]).sum::<f64>() + [0.05, 0.1][i]).max(0.0)).collect();
        let expect: Vec<f64> = (0..2)
            .map(|i| {
                let z = u2w[2 * i] * r[0] + u2w[2 * i + 1] * r[1] + [-0.2, 0.3][i];
                1.0 / (1.0 + (-z).exp())
            })
            .collect();
        close(g.value(d).data(), &expect, 1e-12);
    }
}
