use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Role;
use crate::numcore::ops::FORGET_GATE;
use crate::numcore::{ParamStore, Real, Tensor};

use super::config::ModelConfig;
use super::ModelError;

pub const INIT_RANGE: f64 = 0.08;
pub const FORGET_BIAS: f64 = 1.0;

macro_rules! params {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Every trainable array of the network, in storage order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Param { $($variant),* }

        impl Param {
            pub const ALL: &'static [Param] = &[$(Param::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Param::$variant => $name),* }
            }
        }
    };
}

params! {
    Embedding => "embedding",
    UserFwdW => "user_encoder.fwd.w",
    UserFwdB => "user_encoder.fwd.b",
    UserBwdW => "user_encoder.bwd.w",
    UserBwdB => "user_encoder.bwd.b",
    SysFwdW => "system_encoder.fwd.w",
    SysFwdB => "system_encoder.fwd.b",
    SysBwdW => "system_encoder.bwd.w",
    SysBwdB => "system_encoder.bwd.b",
    DecoderW => "decoder.w",
    DecoderB => "decoder.b",
    UserAttnWh => "user_attention.w_h",
    UserAttnWs => "user_attention.w_s",
    UserAttnV => "user_attention.v",
    UserAttnB => "user_attention.b",
    SysAttnWh => "system_attention.w_h",
    SysAttnWs => "system_attention.w_s",
    SysAttnV => "system_attention.v",
    SysAttnB => "system_attention.b",
    PtrWContext => "pointer.w_context",
    PtrWState => "pointer.w_state",
    PtrWInput => "pointer.w_input",
    PtrB => "pointer.b",
    OutV => "output.v",
    OutB => "output.b",
    OutV2 => "output.v2",
    OutB2 => "output.b2",
    ClsU => "classifier.u",
    ClsB => "classifier.b",
    ClsU2 => "classifier.u2",
    ClsB2 => "classifier.b2",
}

#[derive(Debug, Clone, Copy)]
pub struct EncoderParams {
    pub fwd_w: Param,
    pub fwd_b: Param,
    pub bwd_w: Param,
    pub bwd_b: Param,
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionParams {
    pub w_h: Param,
    pub w_s: Param,
    pub v: Param,
    pub b: Param,
}

impl Param {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn encoder(role: Role) -> EncoderParams {
        match role {
            Role::User => EncoderParams { fwd_w: Param::UserFwdW, fwd_b: Param::UserFwdB, bwd_w: Param::UserBwdW, bwd_b: Param::UserBwdB },
            Role::System => EncoderParams { fwd_w: Param::SysFwdW, fwd_b: Param::SysFwdB, bwd_w: Param::SysBwdW, bwd_b: Param::SysBwdB },
        }
    }

    pub fn attention(role: Role) -> AttentionParams {
        match role {
            Role::User => AttentionParams { w_h: Param::UserAttnWh, w_s: Param::UserAttnWs, v: Param::UserAttnV, b: Param::UserAttnB },
            Role::System => AttentionParams { w_h: Param::SysAttnWh, w_s: Param::SysAttnWs, v: Param::SysAttnV, b: Param::SysAttnB },
        }
    }

    fn is_lstm_bias(self) -> bool {
        matches!(self, Param::UserFwdB | Param::UserBwdB | Param::SysFwdB | Param::SysBwdB | Param::DecoderB)
    }

    pub fn shape(self, c: &ModelConfig) -> Vec<usize> {
        let (e, hd, he, hs) = (c.embed_dim, c.direction_hidden(), c.encoder_hidden, c.decoder_hidden);
        match self {
            Param::Embedding => vec![c.vocab_size, e],
            Param::UserFwdW | Param::UserBwdW | Param::SysFwdW | Param::SysBwdW => vec![4 * hd, e + hd],
            Param::UserFwdB | Param::UserBwdB | Param::SysFwdB | Param::SysBwdB => vec![4 * hd],
            Param::DecoderW => vec![4 * hs, e + hs],
            Param::DecoderB => vec![4 * hs],
            Param::UserAttnWh | Param::SysAttnWh => vec![c.attention_dim, he],
            Param::UserAttnWs | Param::SysAttnWs => vec![c.attention_dim, hs],
            Param::UserAttnV | Param::SysAttnV | Param::UserAttnB | Param::SysAttnB => vec![c.attention_dim],
            Param::PtrWContext => vec![2 * he],
            Param::PtrWState => vec![hs],
            Param::PtrWInput => vec![e],
            Param::PtrB => vec![1],
            Param::OutV => vec![c.output_hidden, hs + 2 * he],
            Param::OutB => vec![c.output_hidden],
            Param::OutV2 => vec![c.vocab_size, c.output_hidden],
            Param::OutB2 => vec![c.vocab_size],
            Param::ClsU => vec![c.classifier_hidden, 2 * he],
            Param::ClsB => vec![c.classifier_hidden],
            Param::ClsU2 => vec![c.num_domains, c.classifier_hidden],
            Param::ClsB2 => vec![c.num_domains],
        }
    }
}

/// All trainable arrays plus the configuration that fixes their shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    config: ModelConfig,
    store: ParamStore<T>,
}

impl<T: Real> ModelParams<T> {
    /// Uniform `[-0.08, 0.08]` weights; LSTM forget-gate biases start at 1.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        for &p in Param::ALL {
            let mut t = Tensor::uniform(&p.shape(&config), -INIT_RANGE, INIT_RANGE, &mut rng);
            if p.is_lstm_bias() {
                let h = t.len() / 4;
                t.data_mut()[FORGET_GATE * h..(FORGET_GATE + 1) * h].fill(T::from_f64(FORGET_BIAS));
            }
            store.push(p.name(), t);
        }
        Ok(ModelParams { config, store })
    }

    pub fn zeros(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut store = ParamStore::new();
        for &p in Param::ALL {
            store.push(p.name(), Tensor::zeros(&p.shape(&config)));
        }
        Ok(ModelParams { config, store })
    }

    /// Rebuilds from stored tensors, checking every shape against `config`.
    pub fn from_tensors(config: ModelConfig, tensors: Vec<Tensor<T>>) -> Result<Self, ModelError> {
        config.validate()?;
        if tensors.len() != Param::ALL.len() {
            return Err(ModelError::Config(format!("expected {} tensors, got {}", Param::ALL.len(), tensors.len())));
        }
        let mut store = ParamStore::new();
        for (&p, t) in Param::ALL.iter().zip(tensors) {
            if t.shape() != p.shape(&config) {
                return Err(ModelError::Config(format!(
                    "`{}` has shape {:?}, expected {:?}",
                    p.name(),
                    t.shape(),
                    p.shape(&config)
                )));
            }
            store.push(p.name(), t);
        }
        Ok(ModelParams { config, store })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn store(&self) -> &ParamStore<T> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    pub fn get(&self, p: Param) -> &Tensor<T> {
        self.store.get(p.index())
    }

    pub fn get_mut(&mut self, p: Param) -> &mut Tensor<T> {
        self.store.get_mut(p.index())
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        self.store.tensors()
    }
}
