//! Flat key = value configuration files, arithmetic value expressions, and
//! flag overrides. Every file key can be set by a same-named CLI flag; the
//! flag wins.

use anyhow::{anyhow, bail, Context, Result};
use std::path::Path;
use tiercache_core::dc_solver::DcSettings;
use tiercache_core::simulator::{CacheMode, SimSettings};
use tiercache_core::ScenarioConfig;

/// Everything a run needs, resolved from defaults, then the config file,
/// then flags.
#[derive(Debug, Clone, Default)]
pub struct AppConfig {
    pub scenario: ScenarioConfig,
    pub dc: DcSettings,
    pub sim: SimSettings,
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = AppConfig::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!("{}:{}: expected key = value", path.display(), lineno + 1)
            })?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Sets one key from its textual value (numeric keys accept arithmetic
    /// expressions). Unknown keys are errors so typos cannot pass silently.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_contents" => self.scenario.n_contents = eval_usize(value)?,
            "gamma" => self.scenario.gamma = eval_expr(value)?,
            "lambda_ue" => self.scenario.lambda_ue = eval_expr(value)?,
            "lambda_h" => self.scenario.lambda_h = eval_expr(value)?,
            "r_ue" => self.scenario.r_ue = eval_expr(value)?,
            "r_h" => self.scenario.r_h = eval_expr(value)?,
            "alpha" => self.scenario.alpha = eval_expr(value)?,
            "m_ue" => self.scenario.m_ue = eval_usize(value)?,
            "m_h" => self.scenario.m_h = eval_usize(value)?,
            "epsilon" => self.dc.epsilon = eval_expr(value)?,
            "max_outer_iters" => self.dc.max_outer_iters = eval_usize(value)?,
            "inner_tol" => self.dc.inner_tol = eval_expr(value)?,
            "inner_max_iters" => self.dc.inner_max_iters = eval_usize(value)?,
            "convexifier_scale" => self.dc.convexifier_scale = eval_expr(value)?,
            "region_radius" => self.sim.region_radius = eval_expr(value)?,
            "n_trials" => self.sim.n_trials = eval_u64(value)?,
            "rng_seed" => self.sim.rng_seed = eval_u64(value)?,
            "cache_mode" => self.sim.cache_mode = parse_cache_mode(value)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }
}

pub fn parse_cache_mode(value: &str) -> Result<CacheMode> {
    match value {
        "independent" => Ok(CacheMode::Independent),
        "capacity-exact" => Ok(CacheMode::CapacityExact),
        other => bail!("cache_mode must be `independent` or `capacity-exact`, got `{other}`"),
    }
}

fn eval_usize(value: &str) -> Result<usize> {
    let x = eval_expr(value)?;
    if x < 0.0 || x.fract().abs() > 1e-9 || x > usize::MAX as f64 {
        bail!("expected a nonnegative integer, got `{value}`");
    }
    Ok(x.round() as usize)
}

fn eval_u64(value: &str) -> Result<u64> {
    let x = eval_expr(value)?;
    if x < 0.0 || x.fract().abs() > 1e-9 || x > u64::MAX as f64 {
        bail!("expected a nonnegative integer, got `{value}`");
    }
    Ok(x.round() as u64)
}

/// Evaluates `+ - * / ^`, parentheses, `pi`, and ordinary float literals.
/// Lets configs carry quantities like `5000/(pi*500^2)` verbatim.
pub fn eval_expr(text: &str) -> Result<f64> {
    let mut parser = ExprParser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let value = parser.expr()?;
    parser.skip_space();
    if parser.pos != parser.chars.len() {
        bail!("trailing input in expression `{text}`");
    }
    Ok(value)
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn skip_space(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_space();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc += self.term()?;
            } else if self.eat('-') {
                acc -= self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc *= self.factor()?;
            } else if self.eat('/') {
                acc /= self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<f64> {
        if self.eat('-') {
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.factor()?;
            return Ok(base.powf(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64> {
        self.skip_space();
        if self.eat('(') {
            let inner = self.expr()?;
            if !self.eat(')') {
                bail!("missing closing parenthesis");
            }
            return Ok(inner);
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some('p') | Some('P') => {
                let word: String = self.chars[self.pos..]
                    .iter()
                    .take_while(|c| c.is_alphabetic())
                    .collect();
                if word.eq_ignore_ascii_case("pi") {
                    self.pos += 2;
                    Ok(std::f64::consts::PI)
                } else {
                    bail!("unknown identifier `{word}`")
                }
            }
            Some(c) => bail!("unexpected character `{c}`"),
            None => bail!("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        // Scientific suffix: e or E, optional sign, digits.
        if self.peek().is_some_and(|c| c == 'e' || c == 'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.peek().is_some_and(|c| c == '+' || c == '-') {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map_err(|_| anyhow!("bad number `{text}`"))
    }
}

/// Grid syntax: either `start:step:count` or a comma-separated expression
/// list. Values must be strictly increasing.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let values = if parts.len() == 3 {
        let start = eval_expr(parts[0])?;
        let step = eval_expr(parts[1])?;
        let count = eval_usize(parts[2])?;
        if count == 0 {
            bail!("grid count must be >= 1");
        }
        (0..count).map(|k| start + k as f64 * step).collect()
    } else if parts.len() == 1 {
        let items: Vec<&str> = text.split(',').filter(|s| !s.trim().is_empty()).collect();
        if items.is_empty() {
            bail!("empty grid");
        }
        items
            .into_iter()
            .map(eval_expr)
            .collect::<Result<Vec<f64>>>()?
    } else {
        bail!("grid must be `start:step:count` or a comma list, got `{text}`");
    };
    if values.is_empty() {
        bail!("empty grid");
    }
    for pair in values.windows(2) {
        if pair[1] <= pair[0] {
            bail!("grid values must be strictly increasing, got {pair:?}");
        }
    }
    Ok(values)
}
