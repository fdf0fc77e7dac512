use std::cmp::Ordering;
use std::fmt;

/// An L-exponent `(b1, b2)` standing for `L1^b1 L2^b2`.
pub type LMono = (u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precedence {
    L1First,
    L2First,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderKind {
    DegLex,
    Lex,
    /// Integer weights `(w1, w2) ≥ 0`, ties broken by lex.
    Weighted(u64, u64),
}

/// Monomial order on `L1^b1 L2^b2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TermOrder {
    pub kind: OrderKind,
    pub precedence: Precedence,
}

impl TermOrder {
    pub fn deglex() -> Self {
        Self { kind: OrderKind::DegLex, precedence: Precedence::L1First }
    }

    pub fn lex() -> Self {
        Self { kind: OrderKind::Lex, precedence: Precedence::L1First }
    }

    pub fn lex_l2_first() -> Self {
        Self { kind: OrderKind::Lex, precedence: Precedence::L2First }
    }

    /// Weight order; the weights are reduced to a primitive vector.
    pub fn weighted(w1: u64, w2: u64) -> Self {
        let g = num_integer::gcd(w1, w2).max(1);
        Self { kind: OrderKind::Weighted(w1 / g, w2 / g), precedence: Precedence::L1First }
    }

    pub fn with_precedence(mut self, p: Precedence) -> Self {
        self.precedence = p;
        self
    }

    fn lex_cmp(&self, a: LMono, b: LMono) -> Ordering {
        match self.precedence {
            Precedence::L1First => a.0.cmp(&b.0).then(a.1.cmp(&b.1)),
            Precedence::L2First => a.1.cmp(&b.1).then(a.0.cmp(&b.0)),
        }
    }

    pub fn cmp(&self, a: LMono, b: LMono) -> Ordering {
        match self.kind {
            OrderKind::DegLex => (a.0 + a.1).cmp(&(b.0 + b.1)).then_with(|| self.lex_cmp(a, b)),
            OrderKind::Lex => self.lex_cmp(a, b),
            OrderKind::Weighted(w1, w2) => {
                let wa = w1 as u128 * a.0 as u128 + w2 as u128 * a.1 as u128;
                let wb = w1 as u128 * b.0 as u128 + w2 as u128 * b.1 as u128;
                wa.cmp(&wb).then_with(|| self.lex_cmp(a, b))
            }
        }
    }

    /// Largest monomial of a non-empty set.
    pub fn max<I: IntoIterator<Item = LMono>>(&self, it: I) -> Option<LMono> {
        it.into_iter().max_by(|a, b| self.cmp(*a, *b))
    }

    /// The mirrored order (L1 and L2 exchanged).
    pub fn swapped(&self) -> Self {
        let kind = match self.kind {
            OrderKind::Weighted(a, b) => OrderKind::Weighted(b, a),
            k => k,
        };
        let precedence = match self.precedence {
            Precedence::L1First => Precedence::L2First,
            Precedence::L2First => Precedence::L1First,
        };
        Self { kind, precedence }
    }

    /// Parses `deglex:L1,L2`, `lex:L2,L1`, `weight:3,1` or `weight:3,1:L2,L1`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut parts = s.split(':');
        let kind = parts.next()?.trim();
        let prec = |p: Option<&str>| -> Option<Precedence> {
            match p.map(|x| x.replace(' ', "")) {
                None => Some(Precedence::L1First),
                Some(x) if x == "L1,L2" => Some(Precedence::L1First),
                Some(x) if x == "L2,L1" => Some(Precedence::L2First),
                _ => None,
            }
        };
        let o = match kind {
            "deglex" => TermOrder::deglex().with_precedence(prec(parts.next())?),
            "lex" => TermOrder::lex().with_precedence(prec(parts.next())?),
            "weight" => {
                let w = parts.next()?;
                let (a, b) = w.split_once(',')?;
                TermOrder::weighted(a.trim().parse().ok()?, b.trim().parse().ok()?).with_precedence(prec(parts.next())?)
            }
            _ => return None,
        };
        if parts.next().is_some() {
            return None;
        }
        Some(o)
    }
}

impl fmt::Display for TermOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.precedence {
            Precedence::L1First => "L1,L2",
            Precedence::L2First => "L2,L1",
        };
        match self.kind {
            OrderKind::DegLex => write!(f, "deglex:{p}"),
            OrderKind::Lex => write!(f, "lex:{p}"),
            OrderKind::Weighted(a, b) => write!(f, "weight:{a},{b}:{p}"),
        }
    }
}

pub fn divides(a: LMono, b: LMono) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

pub fn lcm(a: LMono, b: LMono) -> LMono {
    (a.0.max(b.0), a.1.max(b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        let d = TermOrder::deglex();
        assert_eq!(d.cmp((2, 0), (1, 1)), Ordering::Greater);
        assert_eq!(d.cmp((0, 3), (2, 0)), Ordering::Greater);
        let l = TermOrder::lex();
        assert_eq!(l.cmp((1, 0), (0, 9)), Ordering::Greater);
        let w = TermOrder::weighted(4, 2);
        assert_eq!(w, TermOrder::weighted(2, 1));
        assert_eq!(w.cmp((1, 0), (0, 2)), Ordering::Greater);
        assert_eq!(w.cmp((1, 0), (0, 3)), Ordering::Less);
        for s in ["deglex:L1,L2", "lex:L2,L1", "weight:3,1:L1,L2"] {
            assert_eq!(TermOrder::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(TermOrder::lex().swapped(), TermOrder::lex_l2_first());
    }
}
