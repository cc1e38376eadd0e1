use rand::Rng;

use super::linalg::Matrix;
use crate::error::{Error, Result};

/// Sizes and optimisation settings of the reordering classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    pub word_dim: usize,
    pub pos_dim: usize,
    /// Width of the concatenated forward/backward LSTM output.
    pub hidden_dim: usize,
    pub relation_dim: usize,
    pub language_dim: usize,
    pub mlp_dim: usize,
    pub layers: usize,
    pub minibatch_tokens: usize,
    pub heldout_fraction: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub clip_norm: f64,
    pub patience: usize,
    pub max_epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            word_dim: 100,
            pos_dim: 100,
            hidden_dim: 400,
            relation_dim: 50,
            language_dim: 50,
            mlp_dim: 200,
            layers: 3,
            minibatch_tokens: 1000,
            heldout_fraction: 0.01,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            clip_norm: 5.0,
            patience: 5,
            max_epochs: 20,
        }
    }
}

impl Hyperparams {
    /// Every dimension set to `dim` (recurrent width `2 * dim`).
    pub fn tiny(dim: usize) -> Self {
        Hyperparams {
            word_dim: dim,
            pos_dim: dim,
            hidden_dim: 2 * dim,
            relation_dim: dim,
            language_dim: dim,
            mlp_dim: dim,
            ..Default::default()
        }
    }

    pub fn direction_width(&self) -> usize {
        self.hidden_dim / 2
    }

    pub fn input_dim(&self) -> usize {
        self.word_dim + self.pos_dim
    }

    /// Width of `[eta_m; eta_h; R[r]; Lambda[dir]; L[lang]]`.
    pub fn query_dim(&self) -> usize {
        2 * self.hidden_dim + self.relation_dim + 2 + self.language_dim
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("word_dim", self.word_dim),
            ("pos_dim", self.pos_dim),
            ("hidden_dim", self.hidden_dim),
            ("relation_dim", self.relation_dim),
            ("language_dim", self.language_dim),
            ("mlp_dim", self.mlp_dim),
            ("layers", self.layers),
            ("minibatch_tokens", self.minibatch_tokens),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Hyperparams(format!("{} must be at least 1", name)));
        }
        if !self.hidden_dim.is_multiple_of(2) {
            return Err(Error::Hyperparams(
                "hidden_dim is split across two directions and must be even".into(),
            ));
        }
        if !(self.heldout_fraction > 0.0 && self.heldout_fraction < 1.0) {
            return Err(Error::Hyperparams(format!(
                "heldout_fraction {} not in (0, 1)",
                self.heldout_fraction
            )));
        }
        Ok(())
    }

    /// `key=value` lines, used by the model file.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("word_dim", self.word_dim.to_string()),
            ("pos_dim", self.pos_dim.to_string()),
            ("hidden_dim", self.hidden_dim.to_string()),
            ("relation_dim", self.relation_dim.to_string()),
            ("language_dim", self.language_dim.to_string()),
            ("mlp_dim", self.mlp_dim.to_string()),
            ("layers", self.layers.to_string()),
            ("minibatch_tokens", self.minibatch_tokens.to_string()),
            ("heldout_fraction", self.heldout_fraction.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("adam_eps", self.adam_eps.to_string()),
            ("clip_norm", self.clip_norm.to_string()),
            ("patience", self.patience.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Hyperparams(format!("bad value {:?} for {}", value, key));
        let int = |v: &str| v.parse::<usize>().map_err(|_| bad());
        let float = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match key {
            "word_dim" => self.word_dim = int(value)?,
            "pos_dim" => self.pos_dim = int(value)?,
            "hidden_dim" => self.hidden_dim = int(value)?,
            "relation_dim" => self.relation_dim = int(value)?,
            "language_dim" => self.language_dim = int(value)?,
            "mlp_dim" => self.mlp_dim = int(value)?,
            "layers" => self.layers = int(value)?,
            "minibatch_tokens" => self.minibatch_tokens = int(value)?,
            "heldout_fraction" => self.heldout_fraction = float(value)?,
            "learning_rate" => self.learning_rate = float(value)?,
            "beta1" => self.beta1 = float(value)?,
            "beta2" => self.beta2 = float(value)?,
            "adam_eps" => self.adam_eps = float(value)?,
            "clip_norm" => self.clip_norm = float(value)?,
            "patience" => self.patience = int(value)?,
            "max_epochs" => self.max_epochs = int(value)?,
            other => return Err(Error::Hyperparams(format!("unknown hyperparameter {:?}", other))),
        }
        Ok(())
    }
}

/// One LSTM direction. Gate rows are stacked input, forget, cell, output;
/// columns are `[x; h_prev]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl LstmParams {
    pub fn width(&self) -> usize {
        self.bias.cols() / 4
    }

    pub fn input_width(&self) -> usize {
        self.weight.cols() - self.width()
    }
}

/// All tensors of the classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierParams {
    pub word: Matrix,
    /// Frozen pretrained vectors, summed with `word`.
    pub word_fixed: Option<Matrix>,
    pub pos: Matrix,
    /// `(forward, backward)` per layer.
    pub lstm: Vec<(LstmParams, LstmParams)>,
    pub relation: Matrix,
    /// Two rows indexed by whether the head follows the modifier.
    pub direction: Matrix,
    pub language: Matrix,
    pub hidden: Matrix,
    pub hidden_bias: Matrix,
    pub output: Matrix,
}

/// Row counts of the embedding tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableSizes {
    pub words: usize,
    pub pos: usize,
    pub relations: usize,
    pub languages: usize,
}

impl ClassifierParams {
    pub fn zeros(hp: &Hyperparams, sizes: TableSizes) -> Self {
        let k = hp.direction_width();
        let lstm = (0..hp.layers)
            .map(|layer| {
                let input = if layer == 0 { hp.input_dim() } else { hp.hidden_dim };
                let cell = || LstmParams {
                    weight: Matrix::zeros(4 * k, input + k),
                    bias: Matrix::zeros(1, 4 * k),
                };
                (cell(), cell())
            })
            .collect();
        ClassifierParams {
            word: Matrix::zeros(sizes.words, hp.word_dim),
            word_fixed: None,
            pos: Matrix::zeros(sizes.pos, hp.pos_dim),
            lstm,
            relation: Matrix::zeros(sizes.relations, hp.relation_dim),
            direction: Matrix::zeros(2, 2),
            language: Matrix::zeros(sizes.languages, hp.language_dim),
            hidden: Matrix::zeros(hp.mlp_dim, hp.query_dim()),
            hidden_bias: Matrix::zeros(1, hp.mlp_dim),
            output: Matrix::zeros(2, hp.mlp_dim),
        }
    }

    /// Embeddings uniform in (-0.05, 0.05); recurrent matrices uniform in
    /// +-1/sqrt(width); MLP layers Glorot-uniform; zero biases except the
    /// LSTM forget gate at 1.
    pub fn init<R: Rng>(hp: &Hyperparams, sizes: TableSizes, rng: &mut R) -> Self {
        let mut p = ClassifierParams::zeros(hp, sizes);
        let emb = 0.05;
        p.word = Matrix::uniform(sizes.words, hp.word_dim, emb, rng);
        p.pos = Matrix::uniform(sizes.pos, hp.pos_dim, emb, rng);
        let k = hp.direction_width();
        for (fwd, bwd) in &mut p.lstm {
            for cell in [fwd, bwd] {
                let (rows, cols) = cell.weight.shape();
                cell.weight = Matrix::uniform(rows, cols, 1.0 / (k as f64).sqrt(), rng);
                cell.bias.as_mut_slice()[k..2 * k].fill(1.0);
            }
        }
        p.relation = Matrix::uniform(sizes.relations, hp.relation_dim, emb, rng);
        p.direction = Matrix::uniform(2, 2, emb, rng);
        p.language = Matrix::uniform(sizes.languages, hp.language_dim, emb, rng);
        let glorot = |rows: usize, cols: usize| (6.0 / (rows + cols) as f64).sqrt();
        p.hidden = Matrix::uniform(hp.mlp_dim, hp.query_dim(), glorot(hp.mlp_dim, hp.query_dim()), rng);
        p.output = Matrix::uniform(2, hp.mlp_dim, glorot(2, hp.mlp_dim), rng);
        p
    }

    /// Same shapes, all zeros, without the frozen table.
    pub fn zeros_like(&self) -> Self {
        let z = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        ClassifierParams {
            word: z(&self.word),
            word_fixed: None,
            pos: z(&self.pos),
            lstm: self
                .lstm
                .iter()
                .map(|(f, b)| {
                    let cell = |c: &LstmParams| LstmParams {
                        weight: z(&c.weight),
                        bias: z(&c.bias),
                    };
                    (cell(f), cell(b))
                })
                .collect(),
            relation: z(&self.relation),
            direction: z(&self.direction),
            language: z(&self.language),
            hidden: z(&self.hidden),
            hidden_bias: z(&self.hidden_bias),
            output: z(&self.output),
        }
    }

    /// Trainable tensors with stable names, in a fixed order.
    pub fn trainable(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("word".to_string(), &self.word), ("pos".to_string(), &self.pos)];
        for (l, (f, b)) in self.lstm.iter().enumerate() {
            out.push((format!("lstm{}.fwd.weight", l), &f.weight));
            out.push((format!("lstm{}.fwd.bias", l), &f.bias));
            out.push((format!("lstm{}.bwd.weight", l), &b.weight));
            out.push((format!("lstm{}.bwd.bias", l), &b.bias));
        }
        out.extend([
            ("relation".to_string(), &self.relation),
            ("direction".to_string(), &self.direction),
            ("language".to_string(), &self.language),
            ("hidden".to_string(), &self.hidden),
            ("hidden_bias".to_string(), &self.hidden_bias),
            ("output".to_string(), &self.output),
        ]);
        out
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![&mut self.word, &mut self.pos];
        for (f, b) in &mut self.lstm {
            out.push(&mut f.weight);
            out.push(&mut f.bias);
            out.push(&mut b.weight);
            out.push(&mut b.bias);
        }
        out.extend([
            &mut self.relation,
            &mut self.direction,
            &mut self.language,
            &mut self.hidden,
            &mut self.hidden_bias,
            &mut self.output,
        ]);
        out
    }

    pub fn squared_norm(&self) -> f64 {
        self.trainable().iter().map(|(_, m)| m.squared_norm()).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for m in self.trainable_mut() {
            m.scale(factor);
        }
    }

    pub fn fill_zero(&mut self) {
        for m in self.trainable_mut() {
            m.fill(0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sizes() -> TableSizes {
        TableSizes { words: 5, pos: 3, relations: 4, languages: 2 }
    }

    #[test]
    fn query_width_matches_concatenation() {
        let hp = Hyperparams::default();
        assert_eq!(hp.query_dim(), 2 * 400 + 50 + 2 + 50);
        let p = ClassifierParams::zeros(&hp, sizes());
        assert_eq!(p.hidden.cols(), hp.query_dim());
        assert_eq!(p.lstm.len(), 3);
        assert_eq!(p.lstm[0].0.weight.shape(), (800, 200 + 200));
        assert_eq!(p.lstm[1].0.weight.shape(), (800, 400 + 200));
    }

    #[test]
    fn validation() {
        assert!(Hyperparams::default().validate().is_ok());
        let mut hp = Hyperparams::tiny(2);
        hp.hidden_dim = 3;
        assert!(hp.validate().is_err());
        let mut hp = Hyperparams::tiny(2);
        hp.heldout_fraction = 1.0;
        assert!(hp.validate().is_err());
        let mut hp = Hyperparams::tiny(2);
        hp.mlp_dim = 0;
        assert!(hp.validate().is_err());
    }

    #[test]
    fn init_is_seeded_and_sets_forget_bias() {
        let hp = Hyperparams::tiny(3);
        let a = ClassifierParams::init(&hp, sizes(), &mut ChaCha8Rng::seed_from_u64(7));
        let b = ClassifierParams::init(&hp, sizes(), &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        let bias = a.lstm[0].0.bias.as_slice();
        assert_eq!(&bias[3..6], &[1.0, 1.0, 1.0]);
        assert_eq!(&bias[0..3], &[0.0, 0.0, 0.0]);
        assert!(a.word.as_slice().iter().all(|x| x.abs() < 0.05));
    }

    #[test]
    fn hyperparam_pairs_round_trip() {
        let hp = Hyperparams::tiny(4);
        let mut back = Hyperparams::default();
        for (k, v) in hp.to_pairs() {
            back.set(k, &v).unwrap();
        }
        assert_eq!(back, hp);
        assert!(back.set("nope", "1").is_err());
    }
}
