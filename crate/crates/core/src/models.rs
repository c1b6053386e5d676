//! Tabular datasets and the conditional samplers the sampling network is built from.
//!
//! [`ConditionalModel`] is the only interface the network executor relies on;
//! the discrete [`CptModel`] covers fitted, exact and uniform samplers.

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};

use crate::admg::{VarSet, Variable};
use crate::dist::{encode, state_count, Assignment, DistTable};
use crate::error::{invalid, Error, Result};

/// Column-major table of discrete observations.
///
/// `intervened` marks columns whose values were set by an intervention while
/// the data was regenerated, rather than observed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    vars: Vec<Variable>,
    columns: Vec<Vec<u32>>,
    intervened: VarSet,
}

impl Dataset {
    pub fn from_columns(vars: Vec<Variable>, columns: Vec<Vec<u32>>) -> Result<Self> {
        if vars.len() != columns.len() {
            return Err(invalid("one column per variable required"));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|u| u.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        for (v, col) in vars.iter().zip(&columns) {
            if col.len() != n {
                return Err(invalid("columns differ in length"));
            }
            if let Some(x) = col.iter().find(|&&x| x as usize >= v.cardinality) {
                return Err(invalid(format!(
                    "value {x} out of range for `{}` (cardinality {})",
                    v.name, v.cardinality
                )));
            }
        }
        Ok(Self {
            vars,
            columns,
            intervened: VarSet::new(),
        })
    }

    pub fn from_rows(vars: Vec<Variable>, rows: &[Vec<usize>]) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); vars.len()];
        for row in rows {
            if row.len() != vars.len() {
                return Err(invalid("row width does not match the variable list"));
            }
            for (c, &x) in columns.iter_mut().zip(row) {
                c.push(x as u32);
            }
        }
        Self::from_columns(vars, columns)
    }

    /// Builds from a row-major buffer of `vars.len()` values per row.
    pub(crate) fn from_row_major(vars: Vec<Variable>, flat: &[u32]) -> Self {
        let w = vars.len();
        let n = if w == 0 { 0 } else { flat.len() / w };
        let mut columns = vec![Vec::with_capacity(n); w];
        for row in flat.chunks_exact(w.max(1)).take(n) {
            for (c, &x) in columns.iter_mut().zip(row) {
                c.push(x);
            }
        }
        Self {
            vars,
            columns,
            intervened: VarSet::new(),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn column(&self, name: &str) -> Option<&[u32]> {
        self.position(name).map(|i| self.columns[i].as_slice())
    }

    pub(crate) fn column_at(&self, i: usize) -> &[u32] {
        &self.columns[i]
    }

    pub fn row(&self, i: usize) -> Vec<usize> {
        self.columns.iter().map(|c| c[i] as usize).collect()
    }

    pub fn intervened(&self) -> &VarSet {
        &self.intervened
    }

    pub fn set_intervened(&mut self, cols: VarSet) -> Result<()> {
        if let Some(v) = cols.iter().find(|v| !self.contains(v)) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        self.intervened = cols;
        Ok(())
    }

    /// Keeps the listed columns, in dataset order.
    pub fn select(&self, keep: &VarSet) -> Result<Dataset> {
        if let Some(v) = keep.iter().find(|v| !self.contains(v)) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        let idx: Vec<usize> = (0..self.vars.len())
            .filter(|&i| keep.contains(&self.vars[i].name))
            .collect();
        Ok(Dataset {
            vars: idx.iter().map(|&i| self.vars[i].clone()).collect(),
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            intervened: self.intervened.intersection(keep),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.vars.iter().map(|v| v.name.as_str()))?;
        let mut record = Vec::with_capacity(self.vars.len());
        for i in 0..self.n_rows() {
            record.clear();
            record.extend(self.columns.iter().map(|c| c[i].to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV whose header names are looked up in `schema` for cardinalities.
    pub fn read_csv<R: Read>(input: R, schema: &[Variable]) -> Result<Dataset> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r.headers()?.clone();
        let vars = header
            .iter()
            .map(|h| {
                schema
                    .iter()
                    .find(|v| v.name == h)
                    .cloned()
                    .ok_or_else(|| Error::Parse {
                        line: 1,
                        message: format!("column `{h}` is not a known variable"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut columns = vec![Vec::new(); vars.len()];
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            if rec.len() != vars.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", vars.len(), rec.len()),
                });
            }
            for ((field, col), v) in rec.iter().zip(&mut columns).zip(&vars) {
                let x: u32 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{field}` is not a state index"),
                })?;
                if x as usize >= v.cardinality {
                    return Err(Error::Parse {
                        line,
                        message: format!("state {x} out of range for `{}`", v.name),
                    });
                }
                col.push(x);
            }
        }
        Dataset::from_columns(vars, columns).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })
    }

    /// Path of the sidecar listing intervened columns.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".intervened");
        PathBuf::from(s)
    }

    /// Writes the CSV and, when any column is marked intervened, the sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))?;
        let side = Self::sidecar_path(path);
        if !self.intervened.is_empty() {
            let mut f = BufWriter::new(File::create(side)?);
            for name in self.names() {
                if self.intervened.contains(name) {
                    writeln!(f, "{name}")?;
                }
            }
            f.flush()?;
        }
        Ok(())
    }

    pub fn load(path: &Path, schema: &[Variable]) -> Result<Dataset> {
        let mut d = Self::read_csv(BufReader::new(File::open(path)?), schema)?;
        let side = Self::sidecar_path(path);
        if side.exists() {
            let mut cols = VarSet::new();
            for line in BufReader::new(File::open(side)?).lines() {
                let line = line?;
                let name = line.trim();
                if !name.is_empty() {
                    cols.insert(name);
                }
            }
            d.set_intervened(cols)?;
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Fitted from samples.
    Cpt,
    /// Read off an exact joint table.
    Exact,
    Uniform,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cpt => "cpt",
            ModelKind::Exact => "exact",
            ModelKind::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpt" => Ok(ModelKind::Cpt),
            "exact" => Ok(ModelKind::Exact),
            "uniform" => Ok(ModelKind::Uniform),
            _ => Err(invalid(format!("unknown model kind `{s}`"))),
        }
    }
}

/// A sampler for one variable given an ordered context.
///
/// Implementations must be immutable once built: any number of threads may
/// draw from the same model, each with its own randomness stream.
pub trait ConditionalModel: fmt::Debug + Send + Sync {
    fn target(&self) -> &Variable;

    fn context(&self) -> &[Variable];

    fn kind(&self) -> ModelKind;

    /// Distribution over target states for one context configuration, given in
    /// context order.
    fn probabilities(&self, context: &[usize]) -> Cow<'_, [f64]>;

    fn draw(&self, context: &[usize], rng: &mut dyn RngCore) -> usize {
        categorical(&self.probabilities(context), rng.gen())
    }

    /// Dense row-major table, if the model has one.
    fn table(&self) -> Option<&[f64]> {
        None
    }
}

/// Inverse-CDF draw of one state for a uniform variate `u`.
pub(crate) fn categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples `m` at a named context assignment.
pub fn sample(m: &dyn ConditionalModel, ctx: &Assignment, rng: &mut dyn RngCore) -> Result<usize> {
    let states = m
        .context()
        .iter()
        .map(|v| {
            ctx.get(&v.name)
                .copied()
                .ok_or_else(|| invalid(format!("context variable `{}` is not assigned", v.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(m.draw(&states, rng))
}

/// Conditional probability table, one row per context configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CptModel {
    kind: ModelKind,
    target: Variable,
    context: Vec<Variable>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CptModel {
    /// Wraps a row-major table. Every row must sum to one within 1e-9.
    pub fn new(
        kind: ModelKind,
        target: Variable,
        context: Vec<Variable>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let k = target.cardinality;
        if probs.len() != state_count(&context) * k {
            return Err(invalid(format!(
                "table for `{}` has {} entries, expected {}",
                target.name,
                probs.len(),
                state_count(&context) * k
            )));
        }
        if context.iter().any(|c| c.name == target.name) {
            return Err(invalid(format!(
                "`{}` appears in its own context",
                target.name
            )));
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        for row in probs.chunks_exact(k) {
            if row.iter().any(|p| !(*p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(invalid(format!(
                    "row {row:?} of `{}` is not a distribution",
                    target.name
                )));
            }
            let mut acc = 0.0;
            for p in row {
                acc += p;
                cumulative.push(acc);
            }
        }
        Ok(Self {
            kind,
            target,
            context,
            probs,
            cumulative,
        })
    }

    pub fn row_index(&self, context: &[usize]) -> usize {
        let cards: Vec<usize> = self.context.iter().map(|v| v.cardinality).collect();
        encode(context, &cards)
    }

    pub fn row(&self, context: &[usize]) -> &[f64] {
        let k = self.target.cardinality;
        let r = self.row_index(context);
        &self.probs[r * k..(r + 1) * k]
    }
}

impl ConditionalModel for CptModel {
    fn target(&self) -> &Variable {
        &self.target
    }

    fn context(&self) -> &[Variable] {
        &self.context
    }

    fn kind(&self) -> ModelKind {
        self.kind
    }

    fn probabilities(&self, context: &[usize]) -> Cow<'_, [f64]> {
        Cow::Borrowed(self.row(context))
    }

    fn draw(&self, context: &[usize], rng: &mut dyn RngCore) -> usize {
        let k = self.target.cardinality;
        let r = self.row_index(context);
        let cum = &self.cumulative[r * k..(r + 1) * k];
        let u: f64 = rng.gen();
        cum.iter().position(|&c| u < c).unwrap_or(k - 1)
    }

    fn table(&self) -> Option<&[f64]> {
        Some(&self.probs)
    }
}

/// Maximum-likelihood table with add-one smoothing over target states.
/// Context configurations absent from `d` get the uniform row.
pub fn fit_conditional(d: &Dataset, target: &str, context: &[&str]) -> Result<CptModel> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if context.contains(&target) {
        return Err(invalid(format!("`{target}` appears in its own context")));
    }
    let col = |name: &str| {
        d.position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };
    let t = col(target)?;
    let ctx: Vec<usize> = context.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let k = d.vars[t].cardinality;
    let cards: Vec<usize> = ctx.iter().map(|&c| d.vars[c].cardinality).collect();
    let rows = cards.iter().product::<usize>();
    let mut counts = vec![0u64; rows * k];
    let target_col = &d.columns[t];
    let ctx_cols: Vec<&[u32]> = ctx.iter().map(|&c| d.columns[c].as_slice()).collect();
    for i in 0..d.n_rows() {
        let mut r = 0;
        for (c, &card) in ctx_cols.iter().zip(&cards) {
            r = r * card + c[i] as usize;
        }
        counts[r * k + target_col[i] as usize] += 1;
    }
    let mut probs = Vec::with_capacity(counts.len());
    for row in counts.chunks_exact(k) {
        let total: u64 = row.iter().sum();
        let denom = (total + k as u64) as f64;
        probs.extend(row.iter().map(|&n| (n + 1) as f64 / denom));
    }
    CptModel::new(
        ModelKind::Cpt,
        d.vars[t].clone(),
        ctx.iter().map(|&c| d.vars[c].clone()).collect(),
        probs,
    )
}

/// Exact conditional `P(target | context)` read off a joint table.
pub fn exact_conditional(joint: &DistTable, target: &str, context: &[&str]) -> Result<CptModel> {
    if context.contains(&target) {
        return Err(invalid(format!("`{target}` appears in its own context")));
    }
    let mut names: Vec<&str> = context.to_vec();
    names.push(target);
    let m = joint.marginal(&names)?;
    let vars = m.variables();
    let target_var = vars[vars.len() - 1].clone();
    let k = target_var.cardinality;
    let mut probs = Vec::with_capacity(m.len());
    for (r, row) in m.probs().chunks_exact(k).enumerate() {
        let z: f64 = row.iter().sum();
        if !(z > 0.0) {
            return Err(Error::ZeroDenominator(format!(
                "context configuration {r} of P({target} | {})",
                context.join(",")
            )));
        }
        probs.extend(row.iter().map(|p| p / z));
    }
    CptModel::new(
        ModelKind::Exact,
        target_var,
        vars[..vars.len() - 1].to_vec(),
        probs,
    )
}

/// Context-free sampler with every state equally likely.
pub fn uniform_model(v: &Variable) -> CptModel {
    let k = v.cardinality;
    CptModel::new(
        ModelKind::Uniform,
        v.clone(),
        Vec::new(),
        vec![1.0 / k as f64; k],
    )
    .expect("uniform row is a distribution")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bin(name: &str) -> Variable {
        Variable::new(name, 2)
    }

    #[test]
    fn laplace_symmetric_counts() {
        let d = Dataset::from_rows(vec![bin("A")], &[vec![0], vec![0], vec![1], vec![1]]).unwrap();
        let m = fit_conditional(&d, "A", &[]).unwrap();
        assert!((m.row(&[])[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laplace_conditional_counts() {
        let mut rows = Vec::new();
        rows.extend(std::iter::repeat(vec![0, 1]).take(8));
        rows.extend(std::iter::repeat(vec![0, 0]).take(2));
        rows.push(vec![1, 0]);
        let d = Dataset::from_rows(vec![bin("X"), bin("Y")], &rows).unwrap();
        let m = fit_conditional(&d, "Y", &["X"]).unwrap();
        assert!((m.row(&[0])[1] - 0.75).abs() < 1e-15);
        assert!((m.row(&[1])[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let empty = Dataset::from_rows(vec![bin("A")], &[]).unwrap();
        assert!(matches!(
            fit_conditional(&empty, "A", &[]),
            Err(Error::EmptyDataset)
        ));
        let d = Dataset::from_rows(vec![bin("A")], &[vec![0]]).unwrap();
        assert!(fit_conditional(&d, "A", &["A"]).is_err());
        assert!(matches!(
            fit_conditional(&d, "B", &[]),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn unseen_context_gets_uniform_row() {
        let d = Dataset::from_rows(vec![bin("X"), Variable::new("Y", 3)], &[vec![0, 2]]).unwrap();
        let m = fit_conditional(&d, "Y", &["X"]).unwrap();
        assert_eq!(m.row(&[1]), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn uniform_model_frequencies() {
        let m = uniform_model(&Variable::new("V", 3));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let s = m.draw(&[], &mut rng);
            assert!(s < 3);
            counts[s] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn dominant_state_frequency() {
        let m = CptModel::new(ModelKind::Cpt, bin("A"), vec![], vec![0.001, 0.999]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hits = (0..10_000).filter(|_| m.draw(&[], &mut rng) == 1).count();
        assert!((hits as f64 / 10_000.0 - 0.999).abs() < 0.01);
    }

    #[test]
    fn fixed_seed_replays() {
        let m = uniform_model(&bin("A"));
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| m.draw(&[], &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn sample_requires_context() {
        let m = CptModel::new(ModelKind::Exact, bin("Y"), vec![bin("X")], vec![0.5; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample(&m, &Assignment::new(), &mut rng).is_err());
        assert!(sample(&m, &Assignment::from([("X".into(), 1)]), &mut rng).is_ok());
    }

    #[test]
    fn exact_conditional_examples() {
        let joint = DistTable::uniform(vec![bin("X"), bin("Y")]);
        let m = exact_conditional(&joint, "Y", &["X"]).unwrap();
        assert_eq!(m.row(&[0]), &[0.5, 0.5]);
        assert_eq!(m.row(&[1]), &[0.5, 0.5]);

        let point = DistTable::point_mass(vec![bin("X"), bin("Y")], &[1, 0]).unwrap();
        assert!(matches!(
            exact_conditional(&point, "Y", &["X"]),
            Err(Error::ZeroDenominator(_))
        ));
        let m = exact_conditional(&point.condition(&Assignment::new()).unwrap(), "Y", &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| m.draw(&[], &mut rng) == 0));
    }

    #[test]
    fn csv_round_trip_bytes() {
        let text = "A,B\n0,1\n1,2\n1,0\n";
        let schema = vec![bin("A"), Variable::new("B", 3)];
        let d = Dataset::read_csv(text.as_bytes(), &schema).unwrap();
        let mut out = Vec::new();
        d.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
        assert!(matches!(
            Dataset::read_csv("A,B\n0,3\n".as_bytes(), &schema),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
