//! Binary model container and the text format of pretrained vectors.
//!
//! Layout: magic, u32 version, hyperparameter block (`key=value` lines),
//! four vocabulary blocks (words, pos, relations, languages), then named
//! tensors each with a shape header and little-endian f32 data. All
//! integers are little-endian u32.

use std::path::Path;

use super::linalg::Matrix;
use super::params::{ClassifierParams, Hyperparams, TableSizes};
use super::vocab::{ClassifierVocab, Vocab};
use super::ReorderClassifier;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"UDREORD\x01";
const VERSION: u32 = 1;
const FIXED: &str = "word_fixed";

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

fn put_tensor(out: &mut Vec<u8>, name: &str, m: &Matrix) {
    put_str(out, name);
    put_u32(out, 2);
    put_u32(out, m.rows());
    put_u32(out, m.cols());
    for &x in m.as_slice() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
}

pub fn to_bytes(model: &ReorderClassifier) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION as usize);

    let hyper: String = model
        .hyper
        .to_pairs()
        .into_iter()
        .map(|(k, v)| format!("{}={}\n", k, v))
        .collect();
    put_str(&mut out, &hyper);

    let v = &model.vocab;
    for vocab in [&v.words, &v.pos, &v.relations, &v.languages] {
        put_u32(&mut out, vocab.len());
        for item in vocab.items() {
            put_str(&mut out, item);
        }
    }

    let mut tensors = model.params.trainable();
    if let Some(fixed) = &model.params.word_fixed {
        tensors.push((FIXED.to_string(), fixed));
    }
    put_u32(&mut out, tensors.len());
    for (name, m) in tensors {
        put_tensor(&mut out, &name, m);
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Model(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Model("invalid UTF-8 string".into()))
    }
}

pub fn from_bytes(data: &[u8]) -> Result<ReorderClassifier> {
    let mut r = Reader { data, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Model("not a reordering model file".into()));
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(Error::Model(format!("unsupported model version {}", version)));
    }

    let mut hyper = Hyperparams::default();
    for line in r.string()?.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Model(format!("bad hyperparameter line {:?}", line)))?;
        hyper.set(k, v)?;
    }
    hyper.validate()?;

    let mut read_vocab = || -> Result<Vocab> {
        let n = r.u32()?;
        let items = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        Ok(Vocab::from_items(items))
    };
    let vocab = ClassifierVocab {
        words: read_vocab()?,
        pos: read_vocab()?,
        relations: read_vocab()?,
        languages: read_vocab()?,
    };
    let sizes = TableSizes {
        words: vocab.words.len(),
        pos: vocab.pos.len(),
        relations: vocab.relations.len(),
        languages: vocab.languages.len(),
    };
    let mut params = ClassifierParams::zeros(&hyper, sizes);
    let names: Vec<String> = params.trainable().into_iter().map(|(n, _)| n).collect();
    let mut seen = vec![false; names.len()];

    let count = r.u32()?;
    for _ in 0..count {
        let name = r.string()?;
        let ndim = r.u32()?;
        if ndim != 2 {
            return Err(Error::Model(format!("tensor {} has {} dimensions", name, ndim)));
        }
        let (rows, cols) = (r.u32()?, r.u32()?);
        let raw = r.take(rows * cols * 4)?;
        let values = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        let m = Matrix::from_vec(rows, cols, values);

        if name == FIXED {
            if m.shape() != params.word.shape() {
                return Err(Error::Model(format!("tensor {} has shape {:?}", name, m.shape())));
            }
            params.word_fixed = Some(m);
            continue;
        }
        let t = names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::Model(format!("unknown tensor {}", name)))?;
        let slot = &mut params.trainable_mut()[t];
        if slot.shape() != m.shape() {
            return Err(Error::Model(format!(
                "tensor {} has shape {:?}, expected {:?}",
                name,
                m.shape(),
                slot.shape()
            )));
        }
        **slot = m;
        seen[t] = true;
    }
    if let Some(t) = seen.iter().position(|s| !s) {
        return Err(Error::Model(format!("missing tensor {}", names[t])));
    }
    Ok(ReorderClassifier { hyper, vocab, params })
}

pub fn save(path: &Path, model: &ReorderClassifier) -> Result<()> {
    std::fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ReorderClassifier> {
    from_bytes(&std::fs::read(path)?)
}

/// Round every value to f32 precision so that a saved model behaves
/// exactly like the in-memory one.
pub fn round_to_f32(params: &mut ClassifierParams) {
    let mut tensors = params.trainable_mut();
    for m in tensors.iter_mut() {
        m.as_mut_slice().iter_mut().for_each(|x| *x = *x as f32 as f64);
    }
    drop(tensors);
    if let Some(fixed) = &mut params.word_fixed {
        fixed.as_mut_slice().iter_mut().for_each(|x| *x = *x as f32 as f64);
    }
}

/// Pretrained word vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pretrained {
    pub dim: usize,
    pub vectors: Vec<(String, Vec<f64>)>,
}

/// One `form v1 ... vd` entry per line. A leading `count dim` header line
/// is accepted and ignored.
pub fn parse_pretrained(text: &str) -> Result<Pretrained> {
    let mut out = Pretrained::default();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            continue;
        }
        let bad = |message: String| Error::Table { line: i + 1, message };
        let values = fields[1..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("non-numeric value {:?}", v))))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(bad("vector without values".into()));
        }
        if out.dim == 0 {
            out.dim = values.len();
        } else if values.len() != out.dim {
            return Err(bad(format!("expected {} values, found {}", out.dim, values.len())));
        }
        out.vectors.push((fields[0].to_string(), values));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pretrained_text() {
        let p = parse_pretrained("2 3\nthe 0.1 0.2 0.3\ncat 1 2 3\n").unwrap();
        assert_eq!(p.dim, 3);
        assert_eq!(p.vectors[1], ("cat".to_string(), vec![1.0, 2.0, 3.0]));
        let err = parse_pretrained("a 1 2\nb 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{}", err);
    }

    #[test]
    fn rejects_foreign_bytes() {
        assert!(from_bytes(b"not a model at all").is_err());
        assert!(from_bytes(b"UDR").is_err());
    }
}
