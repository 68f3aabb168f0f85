//! Word vectors in the common whitespace-separated text format and cosine
//! relatedness between words and context labels.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::dataset::normalize_token;
use crate::error::{Error, Result};

/// Token to fixed-length vector map. Stored vectors are finite and nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    data: Vec<f64>,
    norms: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine of two vectors; `None` if either has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in insertion order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Adds a vector. Returns `Ok(false)` without storing when the token is
    /// already present or the vector has zero norm.
    pub fn insert(&mut self, token: &str, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::format(format!(
                "vector for {token:?} has {} components, table dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::format(format!("vector for {token:?} has a non-finite component")));
        }
        let n = norm(vector);
        if n == 0.0 || self.index.contains_key(token) {
            return Ok(false);
        }
        self.index.insert(token.to_string(), self.tokens.len());
        self.tokens.push(token.to_string());
        self.data.extend_from_slice(vector);
        self.norms.push(n);
        Ok(true)
    }

    /// Loads the text format: an optional `<vocab> <dim>` header, then one
    /// `token x1 ... xdim` line per word. Without a header the first data line
    /// fixes the dimensionality.
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = None;
        let mut components = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(raw_token) = fields.next() else {
                continue;
            };
            let rest: Vec<&str> = fields.collect();
            if line_no == 1 && rest.len() == 1 {
                if let (Ok(_), Ok(dim)) = (raw_token.parse::<usize>(), rest[0].parse::<usize>()) {
                    if dim == 0 {
                        return Err(Error::parse(line_no, "header declares dim 0"));
                    }
                    table = Some(EmbeddingTable::new(dim));
                    continue;
                }
            }
            let table = table.get_or_insert_with(|| EmbeddingTable::new(rest.len()));
            if table.dim == 0 {
                return Err(Error::parse(line_no, "vector line has no components"));
            }
            if rest.len() != table.dim {
                return Err(Error::parse(
                    line_no,
                    format!("expected {} components, found {}", table.dim, rest.len()),
                ));
            }
            components.clear();
            for f in &rest {
                let x: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad component {f:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(line_no, format!("non-finite component {f:?}")));
                }
                components.push(x);
            }
            let Some(token) = normalize_token(raw_token) else {
                continue;
            };
            if norm(&components) == 0.0 {
                log::warn!("line {line_no}: zero-norm vector for {token:?} skipped");
                continue;
            }
            if !table.insert(&token, &components)? {
                log::warn!("line {line_no}: duplicate token {token:?}, keeping first occurrence");
            }
        }
        Ok(table.unwrap_or_default())
    }

    /// Writes the text format with a `<vocab> <dim>` header.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (i, token) in self.tokens.iter().enumerate() {
            if token.chars().any(char::is_whitespace) {
                return Err(Error::format(format!("token {token:?} cannot be stored")));
            }
            out.write_all(token.as_bytes())?;
            for x in self.row(i) {
                write!(out, " {x}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Cosine between two stored tokens, `None` when either is missing.
    pub fn similarity(&self, w: &str, c: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(w)?, self.index.get(c)?);
        if i == j {
            return Some(1.0);
        }
        let cos = dot(self.row(i), self.row(j)) / (self.norms[i] * self.norms[j]);
        Some(cos.clamp(-1.0, 1.0))
    }

    /// Vector for a context label. A label stored verbatim is used directly;
    /// otherwise it is split on underscores and spaces and the vectors of the
    /// parts found are averaged.
    pub fn label_vector(&self, label: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.get(label) {
            return Some(v.to_vec());
        }
        let mut sum = vec![0.0; self.dim];
        let mut found = 0usize;
        for part in label.split(|ch: char| ch == '_' || ch.is_whitespace()) {
            if let Some(v) = self.get(part) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                found += 1;
            }
        }
        if found == 0 {
            return None;
        }
        for s in &mut sum {
            *s /= found as f64;
        }
        Some(sum)
    }

    /// Cosine between a word and a context label, resolving compound labels
    /// through [`label_vector`](Self::label_vector).
    pub fn label_similarity(&self, w: &str, label: &str) -> Option<f64> {
        if self.contains(label) {
            return self.similarity(w, label);
        }
        let wv = self.get(w)?;
        let lv = self.label_vector(label)?;
        cosine(wv, &lv)
    }
}
