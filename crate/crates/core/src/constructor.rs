//! β-reduction of type constructors: `(\\x:φ1. φ2) t ↦ φ2[t/x]`.
//!
//! Redexes are searched at every level (inside kinds, inside constructors,
//! and inside the type annotations of terms embedded in constructors).

use crate::syntax::{
    alpha_eq_con, alpha_eq_kind, substitute_in_con, Kind, NodeMut, NodeRef, Path, Term, TypeCon,
};

pub const DEFAULT_FUEL: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    RightmostInnermost,
}

/// A constructor redex `(\\x:φ1. φ2) t` at `path`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConRedex {
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConError {
    #[error("no constructor redex at path {0}")]
    InvalidRedexPath(Path),
    #[error("constructor normalization ran out of fuel after {0} steps")]
    FuelExhausted(usize),
}

fn is_redex(c: &TypeCon) -> bool {
    matches!(c, TypeCon::App(f, _) if matches!(**f, TypeCon::Lambda(..)))
}

fn contract(c: &TypeCon) -> Option<TypeCon> {
    match c {
        TypeCon::App(f, t) => match &**f {
            TypeCon::Lambda(x, _, body) => Some(substitute_in_con(body, x, t)),
            _ => None,
        },
        _ => None,
    }
}

/// All constructor redexes below `node`, in preorder.
pub fn find_con_redexes(node: NodeRef<'_>) -> Vec<ConRedex> {
    fn go(node: NodeRef<'_>, here: &mut Path, out: &mut Vec<ConRedex>) {
        if let NodeRef::Con(c) = node {
            if is_redex(c) {
                out.push(ConRedex { path: here.clone() });
            }
        }
        for (i, child) in node.children().into_iter().enumerate() {
            here.0.push(i);
            go(child, here, out);
            here.0.pop();
        }
    }
    let mut out = Vec::new();
    go(node, &mut Path::root(), &mut out);
    out
}

fn select(node: NodeRef<'_>, strategy: Strategy) -> Option<Path> {
    fn lo(node: NodeRef<'_>, here: &mut Path) -> Option<Path> {
        if matches!(node, NodeRef::Con(c) if is_redex(c)) {
            return Some(here.clone());
        }
        for (i, child) in node.children().into_iter().enumerate() {
            here.0.push(i);
            let r = lo(child, here);
            here.0.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }
    fn ri(node: NodeRef<'_>, here: &mut Path) -> Option<Path> {
        let children = node.children();
        for (i, child) in children.into_iter().enumerate().rev() {
            here.0.push(i);
            let r = ri(child, here);
            here.0.pop();
            if r.is_some() {
                return r;
            }
        }
        matches!(node, NodeRef::Con(c) if is_redex(c)).then(|| here.clone())
    }
    match strategy {
        Strategy::LeftmostOutermost => lo(node, &mut Path::root()),
        Strategy::RightmostInnermost => ri(node, &mut Path::root()),
    }
}

fn step_in(node: NodeMut<'_>, path: &Path) -> Result<(), ConError> {
    match node.at(path) {
        Some(NodeMut::Con(slot)) => match contract(slot) {
            Some(new) => {
                *slot = new;
                Ok(())
            }
            None => Err(ConError::InvalidRedexPath(path.clone())),
        },
        _ => Err(ConError::InvalidRedexPath(path.clone())),
    }
}

/// Contracts the redex `r` of `phi`.
pub fn con_step(phi: &TypeCon, r: &ConRedex) -> Result<TypeCon, ConError> {
    let mut out = phi.clone();
    step_in(NodeMut::Con(&mut out), &r.path)?;
    Ok(out)
}

fn normalize_node(mut node: NodeMut<'_>, strategy: Strategy, fuel: usize) -> Result<(), ConError> {
    for _ in 0..fuel {
        let view = match &node {
            NodeMut::Term(t) => NodeRef::Term(t),
            NodeMut::Con(c) => NodeRef::Con(c),
            NodeMut::Kind(k) => NodeRef::Kind(k),
        };
        let Some(path) = select(view, strategy) else {
            return Ok(());
        };
        let reborrow = match &mut node {
            NodeMut::Term(t) => NodeMut::Term(t),
            NodeMut::Con(c) => NodeMut::Con(c),
            NodeMut::Kind(k) => NodeMut::Kind(k),
        };
        step_in(reborrow, &path)?;
    }
    let view = match &node {
        NodeMut::Term(t) => NodeRef::Term(t),
        NodeMut::Con(c) => NodeRef::Con(c),
        NodeMut::Kind(k) => NodeRef::Kind(k),
    };
    match select(view, strategy) {
        None => Ok(()),
        Some(_) => Err(ConError::FuelExhausted(fuel)),
    }
}

/// Reduces every constructor redex under `strategy`, taking at most `fuel`
/// steps.
pub fn normalize_con(phi: &TypeCon, strategy: Strategy, fuel: usize) -> Result<TypeCon, ConError> {
    let mut out = phi.clone();
    normalize_node(NodeMut::Con(&mut out), strategy, fuel)?;
    Ok(out)
}

pub fn normalize_kind(k: &Kind, fuel: usize) -> Result<Kind, ConError> {
    let mut out = k.clone();
    normalize_node(NodeMut::Kind(&mut out), Strategy::LeftmostOutermost, fuel)?;
    Ok(out)
}

/// Normalizes the constructors occurring in a term's type annotations.
pub fn normalize_term_annotations(t: &Term, fuel: usize) -> Result<Term, ConError> {
    let mut out = t.clone();
    normalize_node(NodeMut::Term(&mut out), Strategy::LeftmostOutermost, fuel)?;
    Ok(out)
}

pub fn is_con_normal(phi: &TypeCon) -> bool {
    select(NodeRef::Con(phi), Strategy::LeftmostOutermost).is_none()
}

fn map_embedded_terms(c: &TypeCon, f: &mut dyn FnMut(&Term) -> Term) -> TypeCon {
    match c {
        TypeCon::Var(_) | TypeCon::Bottom => c.clone(),
        TypeCon::Lambda(x, a, b) => TypeCon::lam(
            x.clone(),
            map_embedded_terms(a, f),
            map_embedded_terms(b, f),
        ),
        TypeCon::Forall(x, a, b) => TypeCon::forall(
            x.clone(),
            map_embedded_terms(a, f),
            map_embedded_terms(b, f),
        ),
        TypeCon::App(g, t) => TypeCon::app(map_embedded_terms(g, f), f(t)),
        TypeCon::Oplus(a) => TypeCon::oplus(map_embedded_terms(a, f)),
        TypeCon::Sigma(a) => TypeCon::sigma(map_embedded_terms(a, f)),
        TypeCon::And(a, b) => TypeCon::and(map_embedded_terms(a, f), map_embedded_terms(b, f)),
    }
}

/// Normal form used to decide `≡β`: constructor redexes are contracted, and
/// terms embedded in the constructor are normalized by their deterministic
/// steps (β and projection) only.
pub fn conversion_normal_form(phi: &TypeCon, fuel: usize) -> Result<TypeCon, ConError> {
    let nf = normalize_con(phi, Strategy::LeftmostOutermost, fuel)?;
    let mut failed = false;
    let mapped = map_embedded_terms(
        &nf,
        &mut |t| match crate::reducer::normalize_pure(t, fuel) {
            Some(u) => u,
            None => {
                failed = true;
                t.clone()
            }
        },
    );
    if failed {
        return Err(ConError::FuelExhausted(fuel));
    }
    normalize_con(&mapped, Strategy::LeftmostOutermost, fuel)
}

/// `φ ≡β ψ`, decided by comparing normal forms up to α. Running out of fuel
/// counts as "not convertible".
pub fn con_equiv(phi: &TypeCon, psi: &TypeCon) -> bool {
    if alpha_eq_con(phi, psi) {
        return true;
    }
    match (
        conversion_normal_form(phi, DEFAULT_FUEL),
        conversion_normal_form(psi, DEFAULT_FUEL),
    ) {
        (Ok(a), Ok(b)) => alpha_eq_con(&a, &b),
        _ => false,
    }
}

pub fn kind_equiv(a: &Kind, b: &Kind) -> bool {
    if alpha_eq_kind(a, b) {
        return true;
    }
    let norm = |k: &Kind| -> Option<Kind> {
        let k = normalize_kind(k, DEFAULT_FUEL).ok()?;
        map_kind_cons(&k, &mut |c| conversion_normal_form(c, DEFAULT_FUEL).ok())
    };
    match (norm(a), norm(b)) {
        (Some(a), Some(b)) => alpha_eq_kind(&a, &b),
        _ => false,
    }
}

fn map_kind_cons(k: &Kind, f: &mut dyn FnMut(&TypeCon) -> Option<TypeCon>) -> Option<Kind> {
    match k {
        Kind::Star => Some(Kind::Star),
        Kind::Pi(x, a, body) => Some(Kind::pi(x.clone(), f(a)?, map_kind_cons(body, f)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_con;

    fn nf(src: &str, s: Strategy) -> TypeCon {
        normalize_con(&parse_con(src).unwrap(), s, DEFAULT_FUEL).unwrap()
    }

    #[test]
    fn single_step() {
        let c = parse_con("(\\\\x:A. P x) t").unwrap();
        let rs = find_con_redexes(NodeRef::Con(&c));
        assert_eq!(rs, vec![ConRedex { path: Path::root() }]);
        assert_eq!(con_step(&c, &rs[0]).unwrap(), parse_con("P t").unwrap());
        let c = parse_con("(\\\\x:A. forall y:A. R x y) t").unwrap();
        assert!(alpha_eq_con(
            &con_step(&c, &ConRedex { path: Path::root() }).unwrap(),
            &parse_con("forall y:A. R t y").unwrap()
        ));
        assert!(matches!(
            con_step(&parse_con("A").unwrap(), &ConRedex { path: Path::root() }),
            Err(ConError::InvalidRedexPath(_))
        ));
    }

    #[test]
    fn nested_under_both_strategies() {
        let src = "(\\\\x:A. (\\\\y:A. R x y) s) t";
        let expected = parse_con("R t s").unwrap();
        assert_eq!(nf(src, Strategy::LeftmostOutermost), expected);
        assert_eq!(nf(src, Strategy::RightmostInnermost), expected);
    }

    #[test]
    fn redexes_inside_annotations_are_found() {
        // the argument is a λ-term whose annotation holds a redex
        let c = parse_con("P (\\z:(\\\\x:A. P x) a. z)").unwrap();
        assert_eq!(find_con_redexes(NodeRef::Con(&c)).len(), 1);
        assert!(is_con_normal(&nf(
            "P (\\z:(\\\\x:A. P x) a. z)",
            Strategy::LeftmostOutermost
        )));
    }

    #[test]
    fn equivalence() {
        let a = parse_con("(\\\\x:A. P x) t").unwrap();
        assert!(con_equiv(&a, &parse_con("P t").unwrap()));
        assert!(!con_equiv(
            &parse_con("A").unwrap(),
            &parse_con("B").unwrap()
        ));
        assert!(con_equiv(
            &parse_con("forall y:A. P y").unwrap(),
            &parse_con("forall z:A. P z").unwrap()
        ));
        // embedded terms are compared up to β and projection
        assert!(con_equiv(
            &parse_con("P ((\\x:A. x) a)").unwrap(),
            &parse_con("P a").unwrap()
        ));
        assert!(con_equiv(
            &parse_con("P <a, b>.0").unwrap(),
            &parse_con("P a").unwrap()
        ));
        // but never up to a probabilistic step
        assert!(!con_equiv(
            &parse_con("P choose[1]{a}{b} !").unwrap(),
            &parse_con("P a").unwrap()
        ));
    }

    #[test]
    fn fuel() {
        let c = parse_con("(\\\\x:A. (\\\\y:A. R x y) s) t").unwrap();
        assert_eq!(
            normalize_con(&c, Strategy::LeftmostOutermost, 1),
            Err(ConError::FuelExhausted(1))
        );
    }

    #[test]
    fn kinds() {
        let k = crate::surface::parse_kind("Pi x:(\\\\y:A. P y) a. *").unwrap();
        let expected = crate::surface::parse_kind("Pi x:P a. *").unwrap();
        assert_eq!(normalize_kind(&k, 10).unwrap(), expected);
        assert!(kind_equiv(&k, &expected));
    }
}
