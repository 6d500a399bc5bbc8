//! Declarations, the expression grammar, and translation between monomials
//! and permutation problems.
//!
//! Expression grammar: factors separated by whitespace or `*`, each factor
//! a name followed by `_{...}` and `^{...}` groups. A leading `-` negates
//! the monomial. Tokens made of digits are components; a token seen once
//! up and once down is a dummy; anything else is free.
//!
//! Declaration lines:
//!
//! ```text
//! bundle spin metric=antisymmetric
//! tensor R rank=4 gens="-(1,2); +(1,3)(2,4)"
//! tensor T rank=6 sym=3..6 bundle=spin
//! ```

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::label_context::{IndexClass, LabelContext, LabelError, Metric};
use crate::perm_group::{detect_symmetric_subsets, Bsgs, GroupError, SymmetricSubsets};
use crate::signed_perm::{PermError, Sign, SignedPerm};
use crate::CanonResult;

pub const DEFAULT_BUNDLE: &str = "default";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("line {line}: {msg}")]
    Decl { line: usize, msg: String },
    #[error("undeclared tensor `{0}`")]
    UndeclaredTensor(String),
    #[error("undeclared bundle `{0}`")]
    UndeclaredBundle(String),
    #[error("tensor `{tensor}` has rank {rank} but got {found} indices")]
    RankMismatch {
        tensor: String,
        rank: usize,
        found: usize,
    },
    #[error("index `{0}` is repeated with the same variance")]
    UnbalancedDummy(String),
    #[error("index `{0}` appears more than twice")]
    RepeatedLabel(String),
    #[error("dummy `{0}` contracts slots of different bundles")]
    MixedBundle(String),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleDecl {
    pub name: String,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorDecl {
    pub name: String,
    pub rank: usize,
    /// Slot symmetries in the tensor's own slot numbering.
    pub generators: Vec<SignedPerm>,
    pub bundle: String,
}

impl TensorDecl {
    pub fn new(name: &str, rank: usize) -> TensorDecl {
        TensorDecl {
            name: name.to_string(),
            rank,
            generators: Vec::new(),
            bundle: DEFAULT_BUNDLE.to_string(),
        }
    }

    /// Adds the transpositions making slots `a..=b` (1-based) totally
    /// symmetric, or antisymmetric with `sign` minus.
    pub fn with_range(mut self, a: usize, b: usize, sign: Sign) -> Result<TensorDecl, PermError> {
        for k in a..b {
            self.generators.push(SignedPerm::from_signed_cycles(
                self.rank,
                sign,
                &[vec![k, k + 1]],
            )?);
        }
        Ok(self)
    }

    pub fn with_cycles(mut self, text: &str) -> Result<TensorDecl, PermError> {
        self.generators
            .push(SignedPerm::parse_cycles(self.rank, text)?);
        Ok(self)
    }

    pub fn in_bundle(mut self, bundle: &str) -> TensorDecl {
        self.bundle = bundle.to_string();
        self
    }
}

/// Known bundles and tensors. Starts with a `default` bundle carrying a
/// symmetric metric.
#[derive(Debug, Clone)]
pub struct Registry {
    bundles: Vec<BundleDecl>,
    tensors: HashMap<String, TensorDecl>,
}

impl Default for Registry {
    fn default() -> Registry {
        Registry::new()
    }
}

impl Registry {
    pub fn new() -> Registry {
        Registry {
            bundles: vec![BundleDecl {
                name: DEFAULT_BUNDLE.to_string(),
                metric: Metric::Symmetric,
            }],
            tensors: HashMap::new(),
        }
    }

    /// Declares a bundle, replacing the metric if it already exists.
    pub fn add_bundle(&mut self, name: &str, metric: Metric) {
        match self.bundles.iter_mut().find(|b| b.name == name) {
            Some(b) => b.metric = metric,
            None => self.bundles.push(BundleDecl {
                name: name.to_string(),
                metric,
            }),
        }
    }

    pub fn add_tensor(&mut self, decl: TensorDecl) -> Result<(), FrontendError> {
        if self.bundle_index(&decl.bundle).is_none() {
            return Err(FrontendError::UndeclaredBundle(decl.bundle));
        }
        self.tensors.insert(decl.name.clone(), decl);
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorDecl> {
        self.tensors.get(name)
    }

    pub fn bundles(&self) -> &[BundleDecl] {
        &self.bundles
    }

    pub fn bundle_index(&self, name: &str) -> Option<usize> {
        self.bundles.iter().position(|b| b.name == name)
    }

    /// Reads a declaration file.
    pub fn parse_decls(text: &str) -> Result<Registry, FrontendError> {
        let mut reg = Registry::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |msg: String| FrontendError::Decl { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let words = split_words(body).map_err(err)?;
            let (kind, name) = match words.as_slice() {
                [kind, name, ..] => (kind.as_str(), name.clone()),
                _ => return Err(err("expected a keyword and a name".into())),
            };
            let mut opts: Vec<(String, String)> = Vec::new();
            for w in &words[2..] {
                let (key, value) = w
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got `{w}`")))?;
                opts.push((key.to_string(), value.to_string()));
            }
            match kind {
                "bundle" => {
                    let mut metric = Metric::Symmetric;
                    for (key, value) in &opts {
                        match key.as_str() {
                            "metric" => metric = parse_metric(value).map_err(err)?,
                            _ => return Err(err(format!("unknown bundle option `{key}`"))),
                        }
                    }
                    reg.add_bundle(&name, metric);
                }
                "tensor" => {
                    let rank = opts
                        .iter()
                        .find(|(key, _)| key == "rank")
                        .ok_or_else(|| err("missing rank".into()))?
                        .1
                        .parse::<usize>()
                        .map_err(|e| err(format!("bad rank: {e}")))?;
                    let mut decl = TensorDecl::new(&name, rank);
                    for (key, value) in &opts {
                        match key.as_str() {
                            "rank" => {}
                            "gens" => {
                                for g in value.split(';').map(str::trim).filter(|g| !g.is_empty()) {
                                    decl = decl.with_cycles(g).map_err(|e| err(e.to_string()))?;
                                }
                            }
                            "sym" | "asym" => {
                                let (a, b) = parse_range(value, rank).map_err(err)?;
                                let sign = if key == "sym" {
                                    Sign::Plus
                                } else {
                                    Sign::Minus
                                };
                                decl = decl
                                    .with_range(a, b, sign)
                                    .map_err(|e| err(e.to_string()))?;
                            }
                            "bundle" => decl = decl.in_bundle(value),
                            _ => return Err(err(format!("unknown tensor option `{key}`"))),
                        }
                    }
                    reg.add_tensor(decl).map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown declaration `{other}`"))),
            }
        }
        Ok(reg)
    }
}

fn split_words(s: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut any = false;
    for c in s.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                any = true;
            }
            c if c.is_whitespace() && !quoted => {
                if any {
                    out.push(std::mem::take(&mut cur));
                    any = false;
                }
            }
            c => {
                cur.push(c);
                any = true;
            }
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    if any {
        out.push(cur);
    }
    Ok(out)
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    match s {
        "symmetric" => Ok(Metric::Symmetric),
        "antisymmetric" => Ok(Metric::Antisymmetric),
        "none" => Ok(Metric::None),
        other => Err(format!("unknown metric `{other}`")),
    }
}

fn parse_range(s: &str, rank: usize) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("bad range `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
    if a == 0 || a > b || b > rank {
        return Err(format!("range `{s}` outside slots 1..{rank}"));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexToken {
    pub name: String,
    pub up: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub tensor: String,
    pub indices: Vec<IndexToken>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorMonomial {
    pub sign: Sign,
    pub factors: Vec<Factor>,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, FrontendError> {
        let pos = self.pos;
        let msg = msg.into();
        let msg = if pos >= self.src.len() {
            format!("{msg} (end of input)")
        } else {
            msg
        };
        Err(FrontendError::Syntax { pos, msg })
    }

    fn word(&mut self, ok: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && ok(self.src[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

fn is_name_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'\''
}

fn is_token_char(c: u8) -> bool {
    !(c.is_ascii_whitespace() || matches!(c, b'{' | b'}' | b'_' | b'^' | b'*'))
}

impl TensorMonomial {
    /// Parses the expression without consulting any declarations.
    pub fn parse_syntax(text: &str) -> Result<TensorMonomial, FrontendError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        lx.skip_ws();
        let mut sign = Sign::Plus;
        if lx.peek() == Some(b'-') {
            sign = Sign::Minus;
            lx.pos += 1;
            lx.skip_ws();
        }
        let mut factors = Vec::new();
        loop {
            match lx.peek() {
                Some(c) if c.is_ascii_alphabetic() => {}
                _ => return lx.fail("expected a tensor name"),
            }
            let tensor = lx.word(is_name_char);
            let mut indices = Vec::new();
            while let Some(c @ (b'_' | b'^')) = lx.peek() {
                lx.pos += 1;
                if lx.peek() != Some(b'{') {
                    return lx.fail("expected `{`");
                }
                lx.pos += 1;
                loop {
                    lx.skip_ws();
                    match lx.peek() {
                        Some(b'}') => {
                            lx.pos += 1;
                            break;
                        }
                        Some(t) if is_token_char(t) => indices.push(IndexToken {
                            name: lx.word(is_token_char),
                            up: c == b'^',
                        }),
                        Some(_) => return lx.fail("unexpected character in index group"),
                        None => return lx.fail("unclosed index group"),
                    }
                }
            }
            factors.push(Factor { tensor, indices });
            lx.skip_ws();
            if lx.peek() == Some(b'*') {
                lx.pos += 1;
                lx.skip_ws();
            }
            if lx.peek().is_none() {
                break;
            }
        }
        Ok(TensorMonomial { sign, factors })
    }

    /// Parses and validates against the registry.
    pub fn parse(text: &str, registry: &Registry) -> Result<TensorMonomial, FrontendError> {
        let m = TensorMonomial::parse_syntax(text)?;
        m.validate(registry)?;
        Ok(m)
    }

    pub fn slot_count(&self) -> usize {
        self.factors.iter().map(|f| f.indices.len()).sum()
    }

    /// Checks ranks, declarations and index balance.
    pub fn validate(&self, registry: &Registry) -> Result<(), FrontendError> {
        let mut seen: HashMap<&str, Vec<(bool, &str)>> = HashMap::new();
        for f in &self.factors {
            let decl = registry
                .tensor(&f.tensor)
                .ok_or_else(|| FrontendError::UndeclaredTensor(f.tensor.clone()))?;
            if decl.rank != f.indices.len() {
                return Err(FrontendError::RankMismatch {
                    tensor: f.tensor.clone(),
                    rank: decl.rank,
                    found: f.indices.len(),
                });
            }
            for t in &f.indices {
                if !is_component(&t.name) {
                    seen.entry(&t.name).or_default().push((t.up, &decl.bundle));
                }
            }
        }
        for (name, legs) in seen {
            match legs.as_slice() {
                [_] => {}
                [(u1, b1), (u2, b2)] => {
                    if u1 == u2 {
                        return Err(FrontendError::UnbalancedDummy(name.to_string()));
                    }
                    if b1 != b2 {
                        return Err(FrontendError::MixedBundle(name.to_string()));
                    }
                }
                _ => return Err(FrontendError::RepeatedLabel(name.to_string())),
            }
        }
        Ok(())
    }
}

fn is_component(token: &str) -> bool {
    !token.is_empty() && token.bytes().all(|c| c.is_ascii_digit())
}

/// Printable identity of one label code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelInfo {
    pub text: String,
    pub up: bool,
}

/// A monomial translated into permutation form.
#[derive(Debug, Clone)]
pub struct CanonProblem {
    pub g_init: SignedPerm,
    pub slot_group: Bsgs,
    pub ctx: LabelContext,
    pub subsets: SymmetricSubsets,
    pub classes: Vec<IndexClass>,
    pub labels: Vec<LabelInfo>,
    /// Factor names and ranks, left to right.
    pub layout: Vec<(String, usize)>,
}

impl CanonProblem {
    pub fn slot_count(&self) -> usize {
        self.g_init.degree()
    }
}

/// Numbers slots left to right and labels in canonical order, then builds
/// the slot group, the label context and the subset map.
pub fn build_problem(
    m: &TensorMonomial,
    registry: &Registry,
) -> Result<CanonProblem, FrontendError> {
    m.validate(registry)?;
    let n = m.slot_count();
    let mut layout = Vec::new();
    let mut gens = Vec::new();
    // (token, up, bundle index) per slot
    let mut slots: Vec<(&str, bool, usize)> = Vec::with_capacity(n);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for f in &m.factors {
        let decl = registry.tensor(&f.tensor).expect("validated");
        let bundle = registry.bundle_index(&decl.bundle).expect("validated");
        let offset = slots.len();
        for g in &decl.generators {
            let mut images: Vec<u32> = (0..n as u32 + 2).collect();
            for (k, &img) in g.slot_images().iter().enumerate() {
                images[offset + k] = offset as u32 + img;
            }
            if g.sign().is_minus() {
                images.swap(n, n + 1);
            }
            gens.push(SignedPerm::from_images(images)?);
        }
        for t in &f.indices {
            slots.push((&t.name, t.up, bundle));
            *counts.entry(&t.name).or_default() += 1;
        }
        layout.push((f.tensor.clone(), decl.rank));
    }

    let mut frees: Vec<(&str, bool)> = Vec::new();
    // (bundle, numeral, up) -> occurrence slots
    type ComponentKey<'a> = (usize, (usize, &'a str), bool);
    let mut comps: BTreeMap<ComponentKey, Vec<usize>> = BTreeMap::new();
    let mut dummies: Vec<Vec<&str>> = vec![Vec::new(); registry.bundles().len()];
    for (k, &(tok, up, bundle)) in slots.iter().enumerate() {
        if is_component(tok) {
            comps
                .entry((bundle, (tok.len(), tok), up))
                .or_default()
                .push(k);
        } else if counts[tok] == 2 {
            if !up {
                dummies[bundle].push(tok);
            }
        } else {
            frees.push((tok, up));
        }
    }
    frees.sort();
    for d in &mut dummies {
        d.sort();
    }

    let mut classes = Vec::new();
    let mut labels = Vec::new();
    let mut code_of_slot = vec![u32::MAX; n];
    let mut free_code: HashMap<&str, u32> = HashMap::new();
    for &(tok, up) in &frees {
        free_code.insert(tok, labels.len() as u32);
        classes.push(IndexClass::Free);
        labels.push(LabelInfo {
            text: tok.to_string(),
            up,
        });
    }
    for ((_, (_, tok), up), occ) in &comps {
        classes.push(IndexClass::Component { size: occ.len() });
        for &k in occ {
            code_of_slot[k] = labels.len() as u32;
            labels.push(LabelInfo {
                text: tok.to_string(),
                up: *up,
            });
        }
    }
    let mut dummy_code: HashMap<&str, u32> = HashMap::new();
    for (b, names) in dummies.iter().enumerate() {
        if names.is_empty() {
            continue;
        }
        classes.push(IndexClass::Dummy {
            pairs: names.len(),
            metric: registry.bundles()[b].metric,
        });
        for &name in names {
            dummy_code.insert(name, labels.len() as u32);
            for up in [false, true] {
                labels.push(LabelInfo {
                    text: name.to_string(),
                    up,
                });
            }
        }
    }
    for (k, &(tok, up, _)) in slots.iter().enumerate() {
        if let Some(&c) = free_code.get(tok) {
            code_of_slot[k] = c;
        } else if let Some(&c) = dummy_code.get(tok) {
            code_of_slot[k] = c + up as u32;
        }
    }

    let g_init = SignedPerm::from_slot_images(&code_of_slot, m.sign)?;
    let slot_group = Bsgs::schreier_sims(n, &gens)?;
    let ctx = LabelContext::build(&classes)?;
    let subsets = detect_symmetric_subsets(&slot_group);
    Ok(CanonProblem {
        g_init,
        slot_group,
        ctx,
        subsets,
        classes,
        labels,
        layout,
    })
}

/// Prints a configuration of the problem in the expression grammar.
pub fn render_config(g: &SignedPerm, problem: &CanonProblem) -> String {
    let mut out = String::new();
    if g.sign().is_minus() {
        out.push('-');
    }
    let mut slot = 0;
    for (i, (name, rank)) in problem.layout.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(name);
        let mut open: Option<bool> = None;
        for _ in 0..*rank {
            let info = &problem.labels[g.apply(slot)];
            if open != Some(info.up) {
                if open.is_some() {
                    out.push('}');
                }
                out.push_str(if info.up { "^{" } else { "_{" });
                open = Some(info.up);
            } else {
                out.push(' ');
            }
            out.push_str(&info.text);
            slot += 1;
        }
        if open.is_some() {
            out.push('}');
        }
    }
    out
}

/// `0` for a vanishing monomial, the canonical expression otherwise.
pub fn render(result: &CanonResult, problem: &CanonProblem) -> String {
    match result {
        CanonResult::Zero => "0".to_string(),
        CanonResult::Canonical(g) => render_config(g, problem),
    }
}
