use std::fmt;
use std::str::FromStr;

use crate::dist::Assignment;
use crate::error::{Error, Result};

/// A nested potential outcome such as `Y_{X=x0, Z=Z_{X=x1}}`.
///
/// `world` is the base intervention. Each substitution `(V, w)` holds `V` at
/// the value it takes in the same unit under intervention `w`; an empty `w`
/// means the unit's natural value. Variables mentioned nowhere evolve under
/// the base world, so `E[Y_{Z=Z_{X=x0}}]` keeps X at its natural value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterfactualTerm {
    pub outcome: String,
    pub world: Assignment,
    pub substitutions: Vec<(String, Assignment)>,
}

impl CounterfactualTerm {
    pub fn new(outcome: impl Into<String>) -> Self {
        CounterfactualTerm { outcome: outcome.into(), world: Assignment::new(), substitutions: Vec::new() }
    }

    pub fn under(mut self, variable: impl Into<String>, level: impl Into<String>) -> Self {
        self.world.insert(variable, level);
        self
    }

    pub fn substitute(mut self, variable: impl Into<String>, world: Assignment) -> Self {
        self.substitutions.push((variable.into(), world));
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.world.contains(&self.outcome) {
            return Err(Error::MalformedTerm(format!("outcome `{}` is intervened on", self.outcome)));
        }
        for (i, (var, inner)) in self.substitutions.iter().enumerate() {
            if *var == self.outcome {
                return Err(Error::MalformedTerm(format!("outcome `{var}` is substituted")));
            }
            if self.world.contains(var) {
                return Err(Error::MalformedTerm(format!("`{var}` is both intervened on and substituted")));
            }
            if self.substitutions[..i].iter().any(|(v, _)| v == var) {
                return Err(Error::MalformedTerm(format!("`{var}` is substituted twice")));
            }
            if inner.contains(var) {
                return Err(Error::MalformedTerm(format!(
                    "`{var}` is substituted by its own intervened value"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for CounterfactualTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.outcome)?;
        if self.world.is_empty() && self.substitutions.is_empty() {
            return Ok(());
        }
        let mut items: Vec<String> = self.world.iter().map(|(k, v)| format!("{k}={v}")).collect();
        for (var, inner) in &self.substitutions {
            let inner: Vec<String> = inner.iter().map(|(k, v)| format!("{k}={v}")).collect();
            items.push(format!("{var}={var}_{{{}}}", inner.join(",")));
        }
        write!(f, "_{{{}}}", items.join(","))
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    /// A name or level: anything up to a delimiter. `_{` ends a token so
    /// `Z_{X=1}` splits into `Z` and its subscript.
    fn token(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            if matches!(c, ',' | '=' | '{' | '}') || c.is_whitespace() || rest[i..].starts_with("_{") {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            return Err(self.error("expected a name"));
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    fn error(&self, msg: &str) -> Error {
        Error::MalformedTerm(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn plain_items(&mut self) -> Result<Assignment> {
        let mut out = Assignment::new();
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            let var = self.token()?;
            self.expect("=")?;
            let level = self.token()?;
            out.insert(var, level);
            if self.eat("}") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }
}

impl FromStr for CounterfactualTerm {
    type Err = Error;

    /// Grammar: `OUT` or `OUT_{item, ...}` where an item is `V=level` or
    /// `V=V_{W=level, ...}` (use `V=V_{}` for the natural value).
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor { src: s, pos: 0 };
        let mut term = CounterfactualTerm::new(cur.token()?);
        if cur.eat("_{") && !cur.eat("}") {
            loop {
                let var = cur.token()?;
                cur.expect("=")?;
                let value = cur.token()?;
                if cur.eat("_{") {
                    if value != var {
                        return Err(cur.error(&format!("substitution for `{var}` must read `{var}_{{...}}`")));
                    }
                    let inner = cur.plain_items()?;
                    term.substitutions.push((var.to_string(), inner));
                } else {
                    term.world.insert(var, value);
                }
                if cur.eat("}") {
                    break;
                }
                cur.expect(",")?;
            }
        }
        cur.skip_ws();
        if cur.pos != s.len() {
            return Err(cur.error("trailing input"));
        }
        term.check()?;
        Ok(term)
    }
}
