//! Positions inside the three-level syntax.
//!
//! A [`Path`] is a list of child indices. Child numbering is shared by every
//! consumer (redex positions, error locations, parser span trees):
//!
//! | node                     | children                               |
//! |--------------------------|----------------------------------------|
//! | `OracleApp(o, t)`        | 0: `t`                                 |
//! | `Lambda(x, A, b)`        | 0: `A`, 1: `b`                         |
//! | `App`, `Choice`, `Pair`  | 0: left, 1: right                      |
//! | `Nu(t)`, `Proj(t, _)`    | 0: `t`                                 |
//! | `Efq(t, P)`              | 0: `t`, 1: `P`                         |
//! | `CompList(ts)`           | i: `ts[i]`                             |
//! | `CompMerge(t, ks, s)`    | 0: `t`, then every `ks` entry, then `s` |
//! | constructor λ, ∀, ∧      | 0: left, 1: right                      |
//! | constructor `App(φ, t)`  | 0: `φ`, 1: `t`                         |
//! | `Oplus`, `Sigma`         | 0                                      |
//! | `Pi(x, A, K)`            | 0: `A`, 1: `K`                         |

use std::fmt;

use super::term::{Kind, Term, TypeCon};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn child(&self, i: usize) -> Path {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }

    /// Prepends `i`; used when an error bubbles up out of child `i`.
    pub fn within(mut self, i: usize) -> Path {
        self.0.insert(0, i);
        self
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Clone, Copy, Debug)]
pub enum NodeRef<'a> {
    Term(&'a Term),
    Con(&'a TypeCon),
    Kind(&'a Kind),
}

pub enum NodeMut<'a> {
    Term(&'a mut Term),
    Con(&'a mut TypeCon),
    Kind(&'a mut Kind),
}

impl<'a> NodeRef<'a> {
    pub fn children(self) -> Vec<NodeRef<'a>> {
        match self {
            NodeRef::Term(t) => match t {
                Term::Var(_) | Term::Oracle(_) => vec![],
                Term::OracleApp(_, a) | Term::Nu(a) | Term::Proj(a, _) => vec![NodeRef::Term(a)],
                Term::Lambda(_, ty, b) => vec![NodeRef::Con(ty), NodeRef::Term(b)],
                Term::App(a, b) | Term::Choice(a, _, b) | Term::Pair(a, b) => {
                    vec![NodeRef::Term(a), NodeRef::Term(b)]
                }
                Term::Efq(a, ty) => vec![NodeRef::Term(a), NodeRef::Con(ty)],
                Term::CompList(ts, _) => ts.iter().map(NodeRef::Term).collect(),
                Term::CompMerge(s, ks, e, _) => {
                    let mut v = vec![NodeRef::Term(s)];
                    v.extend(ks.iter().flatten().map(NodeRef::Term));
                    v.push(NodeRef::Term(e));
                    v
                }
            },
            NodeRef::Con(c) => match c {
                TypeCon::Var(_) | TypeCon::Bottom => vec![],
                TypeCon::Lambda(_, a, b) | TypeCon::Forall(_, a, b) | TypeCon::And(a, b) => {
                    vec![NodeRef::Con(a), NodeRef::Con(b)]
                }
                TypeCon::App(f, t) => vec![NodeRef::Con(f), NodeRef::Term(t)],
                TypeCon::Oplus(a) | TypeCon::Sigma(a) => vec![NodeRef::Con(a)],
            },
            NodeRef::Kind(k) => match k {
                Kind::Star => vec![],
                Kind::Pi(_, a, k) => vec![NodeRef::Con(a), NodeRef::Kind(k)],
            },
        }
    }

    pub fn child(self, i: usize) -> Option<NodeRef<'a>> {
        self.children().into_iter().nth(i)
    }

    pub fn at(self, path: &Path) -> Option<NodeRef<'a>> {
        path.0.iter().try_fold(self, |node, &i| node.child(i))
    }
}

impl<'a> NodeMut<'a> {
    pub fn child(self, i: usize) -> Option<NodeMut<'a>> {
        match self {
            NodeMut::Term(t) => match t {
                Term::Var(_) | Term::Oracle(_) => None,
                Term::OracleApp(_, a) | Term::Nu(a) | Term::Proj(a, _) => {
                    (i == 0).then_some(NodeMut::Term(a))
                }
                Term::Lambda(_, ty, b) => match i {
                    0 => Some(NodeMut::Con(ty)),
                    1 => Some(NodeMut::Term(b)),
                    _ => None,
                },
                Term::App(a, b) | Term::Choice(a, _, b) | Term::Pair(a, b) => match i {
                    0 => Some(NodeMut::Term(a)),
                    1 => Some(NodeMut::Term(b)),
                    _ => None,
                },
                Term::Efq(a, ty) => match i {
                    0 => Some(NodeMut::Term(a)),
                    1 => Some(NodeMut::Con(ty)),
                    _ => None,
                },
                Term::CompList(ts, _) => ts.get_mut(i).map(NodeMut::Term),
                Term::CompMerge(s, ks, e, _) => {
                    let inner: usize = ks.iter().map(Vec::len).sum();
                    if i == 0 {
                        Some(NodeMut::Term(s))
                    } else if i == inner + 1 {
                        Some(NodeMut::Term(e))
                    } else {
                        ks.iter_mut().flatten().nth(i - 1).map(NodeMut::Term)
                    }
                }
            },
            NodeMut::Con(c) => match c {
                TypeCon::Var(_) | TypeCon::Bottom => None,
                TypeCon::Lambda(_, a, b) | TypeCon::Forall(_, a, b) | TypeCon::And(a, b) => match i
                {
                    0 => Some(NodeMut::Con(a)),
                    1 => Some(NodeMut::Con(b)),
                    _ => None,
                },
                TypeCon::App(f, t) => match i {
                    0 => Some(NodeMut::Con(f)),
                    1 => Some(NodeMut::Term(t)),
                    _ => None,
                },
                TypeCon::Oplus(a) | TypeCon::Sigma(a) => (i == 0).then_some(NodeMut::Con(a)),
            },
            NodeMut::Kind(k) => match k {
                Kind::Star => None,
                Kind::Pi(_, a, k) => match i {
                    0 => Some(NodeMut::Con(a)),
                    1 => Some(NodeMut::Kind(k)),
                    _ => None,
                },
            },
        }
    }

    pub fn at(self, path: &Path) -> Option<NodeMut<'a>> {
        path.0.iter().try_fold(self, |node, &i| node.child(i))
    }
}

impl Term {
    pub fn node_at(&self, path: &Path) -> Option<NodeRef<'_>> {
        NodeRef::Term(self).at(path)
    }

    pub fn term_at(&self, path: &Path) -> Option<&Term> {
        match self.node_at(path)? {
            NodeRef::Term(t) => Some(t),
            _ => None,
        }
    }

    /// Copy of `self` with the term at `path` replaced.
    pub fn replace_term_at(&self, path: &Path, new: Term) -> Option<Term> {
        let mut out = self.clone();
        match NodeMut::Term(&mut out).at(path)? {
            NodeMut::Term(slot) => *slot = new,
            _ => return None,
        }
        Some(out)
    }
}

impl TypeCon {
    pub fn node_at(&self, path: &Path) -> Option<NodeRef<'_>> {
        NodeRef::Con(self).at(path)
    }

    pub fn con_at(&self, path: &Path) -> Option<&TypeCon> {
        match self.node_at(path)? {
            NodeRef::Con(c) => Some(c),
            _ => None,
        }
    }

    pub fn replace_con_at(&self, path: &Path, new: TypeCon) -> Option<TypeCon> {
        let mut out = self.clone();
        match NodeMut::Con(&mut out).at(path)? {
            NodeMut::Con(slot) => *slot = new,
            _ => return None,
        }
        Some(out)
    }
}
