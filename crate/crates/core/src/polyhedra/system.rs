use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PolyError, Rational};

/// A single `Σ coeff·var ≤ rhs` inequality. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    #[serde(rename = "coeffs")]
    coefficients: BTreeMap<String, Rational>,
    rhs: Rational,
}

impl LinearConstraint {
    /// `Σ coeffs ≤ rhs`. Repeated names are summed.
    pub fn le<S, I>(coeffs: I, rhs: Rational) -> Self
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Rational)>,
    {
        let mut coefficients: BTreeMap<String, Rational> = BTreeMap::new();
        for (name, value) in coeffs {
            *coefficients.entry(name.into()).or_default() += value;
        }
        coefficients.retain(|_, v| !v.is_zero());
        LinearConstraint { coefficients, rhs }
    }

    /// `Σ coeffs ≥ rhs`, stored as `−Σ coeffs ≤ −rhs`.
    pub fn ge<S, I>(coeffs: I, rhs: Rational) -> Self
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Rational)>,
    {
        LinearConstraint::le(coeffs, rhs).negated()
    }

    /// `Σ coeffs = rhs` as the pair `≤` and `≥`.
    pub fn eq<S, I>(coeffs: I, rhs: Rational) -> [Self; 2]
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Rational)>,
    {
        let le = LinearConstraint::le(coeffs, rhs);
        let ge = le.negated();
        [le, ge]
    }

    fn negated(&self) -> Self {
        LinearConstraint {
            coefficients: self
                .coefficients
                .iter()
                .map(|(k, v)| (k.clone(), -v))
                .collect(),
            rhs: -&self.rhs,
        }
    }

    pub fn coefficients(&self) -> &BTreeMap<String, Rational> {
        &self.coefficients
    }

    pub fn coefficient(&self, var: &str) -> Rational {
        self.coefficients.get(var).cloned().unwrap_or_default()
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    /// Left-hand side evaluated at `point`; `None` if a referenced variable is absent.
    pub fn evaluate(&self, point: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (name, coeff) in &self.coefficients {
            acc += coeff * point.get(name)?;
        }
        Some(acc)
    }

    pub fn rename(&self, map: &HashMap<String, String>) -> Self {
        LinearConstraint::le(
            self.coefficients.iter().map(|(k, v)| {
                let name = map.get(k).cloned().unwrap_or_else(|| k.clone());
                (name, v.clone())
            }),
            self.rhs.clone(),
        )
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0 <= {}", self.rhs);
        }
        for (n, (name, coeff)) in self.coefficients.iter().enumerate() {
            let negative = coeff.is_negative();
            let magnitude = coeff.abs();
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if magnitude == Rational::one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{magnitude}*{name}")?;
            }
        }
        write!(f, " <= {}", self.rhs)
    }
}

/// A finite conjunction of linear inequalities over named variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct LinearSystem {
    variables: Vec<String>,
    constraints: Vec<LinearConstraint>,
}

#[derive(Deserialize)]
struct RawSystem {
    variables: Vec<String>,
    constraints: Vec<LinearConstraint>,
}

impl TryFrom<RawSystem> for LinearSystem {
    type Error = PolyError;

    fn try_from(raw: RawSystem) -> Result<Self, Self::Error> {
        let mut system = LinearSystem::new(raw.variables)?;
        for c in raw.constraints {
            system.push(c)?;
        }
        Ok(system)
    }
}

impl LinearSystem {
    pub fn new<S: Into<String>>(variables: impl IntoIterator<Item = S>) -> Result<Self, PolyError> {
        let variables: Vec<String> = variables.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(PolyError::DuplicateVariable(v.clone()));
            }
        }
        Ok(LinearSystem {
            variables,
            constraints: Vec::new(),
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }

    pub fn push(&mut self, constraint: LinearConstraint) -> Result<(), PolyError> {
        if let Some(unknown) = constraint
            .coefficients
            .keys()
            .find(|name| !self.has_variable(name))
        {
            return Err(PolyError::UnknownVariable(unknown.clone()));
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn push_all(
        &mut self,
        constraints: impl IntoIterator<Item = LinearConstraint>,
    ) -> Result<(), PolyError> {
        for c in constraints {
            self.push(c)?;
        }
        Ok(())
    }

    /// Same constraints with variables renamed through `map`; unmapped names are kept.
    pub fn renamed(&self, map: &HashMap<String, String>) -> Result<Self, PolyError> {
        let variables: Vec<String> = self
            .variables
            .iter()
            .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
            .collect();
        let mut out = LinearSystem::new(variables)?;
        for c in &self.constraints {
            out.push(c.rename(map))?;
        }
        Ok(out)
    }

    /// True iff `point` satisfies every constraint exactly.
    pub fn check_point(&self, point: &BTreeMap<String, Rational>) -> Result<bool, PolyError> {
        if let Some(missing) = self.variables.iter().find(|v| !point.contains_key(*v)) {
            return Err(PolyError::MissingVariable(missing.clone()));
        }
        Ok(self
            .constraints
            .iter()
            .all(|c| c.evaluate(point).map(|lhs| lhs <= c.rhs).unwrap_or(false)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("linear system serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, PolyError> {
        serde_json::from_str(text).map_err(|e| PolyError::Json(e.to_string()))
    }

    pub(crate) fn variable_index(&self) -> HashMap<&str, usize> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect()
    }

    pub(crate) fn to_dense(&self) -> DenseSystem {
        let index = self.variable_index();
        let rows = self
            .constraints
            .iter()
            .map(|c| {
                let mut coeffs = vec![Rational::zero(); self.variables.len()];
                for (name, value) in &c.coefficients {
                    coeffs[index[name.as_str()]] = value.clone();
                }
                DenseRow {
                    coeffs,
                    rhs: c.rhs.clone(),
                }
            })
            .collect();
        DenseSystem { rows }
    }

    pub(crate) fn from_dense(variables: Vec<String>, dense: &DenseSystem) -> Self {
        let constraints = dense
            .rows
            .iter()
            .map(|row| {
                LinearConstraint::le(
                    row.coeffs
                        .iter()
                        .zip(&variables)
                        .map(|(c, v)| (v.clone(), c.clone())),
                    row.rhs.clone(),
                )
            })
            .collect();
        LinearSystem {
            variables,
            constraints,
        }
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variables: {}", self.variables.join(", "))?;
        for c in &self.constraints {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct DenseRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl DenseRow {
    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// Positive rescaling so the first nonzero coefficient has magnitude one.
    pub fn normalize(&mut self) {
        let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()) else {
            return;
        };
        let scale = lead.abs().recip();
        if scale == Rational::one() {
            return;
        }
        for c in &mut self.coeffs {
            *c *= &scale;
        }
        self.rhs *= &scale;
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct DenseSystem {
    pub rows: Vec<DenseRow>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn ge_and_eq_normalize_to_le() {
        let ge = LinearConstraint::ge([("x", r(1))], r(2));
        assert_eq!(ge.coefficient("x"), r(-1));
        assert_eq!(ge.rhs(), &r(-2));
        let [a, b] = LinearConstraint::eq([("x", r(1)), ("y", r(2))], r(3));
        assert_eq!(a.coefficient("y"), r(2));
        assert_eq!(b.coefficient("y"), r(-2));
        assert_eq!(b.rhs(), &r(-3));
    }

    #[test]
    fn zero_and_repeated_coefficients_collapse() {
        let c = LinearConstraint::le([("x", r(1)), ("y", r(0)), ("x", r(2))], r(1));
        assert_eq!(c.coefficients().len(), 1);
        assert_eq!(c.coefficient("x"), r(3));
    }

    #[test]
    fn undeclared_variable_is_rejected() {
        let mut s = LinearSystem::new(["x"]).unwrap();
        let err = s
            .push(LinearConstraint::le([("y", r(1))], r(0)))
            .unwrap_err();
        assert_eq!(err, PolyError::UnknownVariable("y".into()));
        assert!(LinearSystem::new(["x", "x"]).is_err());
    }

    #[test]
    fn check_point_requires_every_variable() {
        let mut s = LinearSystem::new(["x", "y"]).unwrap();
        s.push(LinearConstraint::le([("x", r(1))], r(1))).unwrap();
        let mut p = BTreeMap::new();
        p.insert("x".to_string(), r(1));
        assert_eq!(
            s.check_point(&p),
            Err(PolyError::MissingVariable("y".into()))
        );
        p.insert("y".to_string(), r(100));
        assert_eq!(s.check_point(&p), Ok(true));
        p.insert("x".to_string(), Rational::new(3, 2));
        assert_eq!(s.check_point(&p), Ok(false));
    }

    #[test]
    fn json_format() {
        let mut s = LinearSystem::new(["d12", "d13"]).unwrap();
        s.push(LinearConstraint::le(
            [("d12", r(1)), ("d13", r(1))],
            Rational::new(5, 2),
        ))
        .unwrap();
        let text = s.to_json();
        assert_eq!(
            text,
            r#"{"variables":["d12","d13"],"constraints":[{"coeffs":{"d12":"1","d13":"1"},"rhs":"5/2"}]}"#
        );
        assert_eq!(LinearSystem::from_json(&text).unwrap(), s);
        let bad = r#"{"variables":["x"],"constraints":[{"coeffs":{"z":"1"},"rhs":"0"}]}"#;
        assert!(matches!(
            LinearSystem::from_json(bad),
            Err(PolyError::Json(_))
        ));
    }

    #[test]
    fn display_is_readable() {
        let c = LinearConstraint::le([("a", r(1)), ("b", Rational::new(-1, 2))], r(4));
        assert_eq!(c.to_string(), "a - 1/2*b <= 4");
    }
}
