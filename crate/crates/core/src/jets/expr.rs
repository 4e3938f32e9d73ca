use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;

use crate::inverse::QuadratureConfig;

/// Node of an expression tree over the real variables `x₁ … x_n`.
///
/// Variables are zero-based here (`Var(0)` is `x₁`); the text form is one-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(usize),
    Const(Complex64),
    Add(Expression, Expression),
    Sub(Expression, Expression),
    Mul(Expression, Expression),
    Div(Expression, Expression),
    Neg(Expression),
    Pow(Expression, i32),
    Powf(Expression, f64),
    Exp(Expression),
    Sin(Expression),
    Cos(Expression),
    Recip(Expression),
    Rexp(Expression),
    Smoothstep(Expression, u32),
    /// `(S̃_{axis,λ} integrand)(x)`, evaluated by quadrature.
    Integral(IntegralNode),
    /// `outer(args₁(x), …, args_k(x))`.
    Compose(Expression, Vec<Expression>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralNode {
    pub integrand: Expression,
    pub axis: usize,
    pub lambda: Complex64,
    pub quadrature: QuadratureConfig,
}

/// Shared, immutable expression tree.
#[derive(Clone, PartialEq)]
pub struct Expression(Arc<Node>);

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Expression {
    pub fn from_node(node: Node) -> Self {
        Expression(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// `x_{axis+1}`
    pub fn var(axis: usize) -> Self {
        Self::from_node(Node::Var(axis))
    }

    pub fn constant(value: Complex64) -> Self {
        Self::from_node(Node::Const(value))
    }

    pub fn real(value: f64) -> Self {
        Self::constant(Complex64::new(value, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    pub fn exp(&self) -> Self {
        Self::from_node(Node::Exp(self.clone()))
    }

    pub fn sin(&self) -> Self {
        Self::from_node(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        Self::from_node(Node::Cos(self.clone()))
    }

    pub fn recip(&self) -> Self {
        Self::from_node(Node::Recip(self.clone()))
    }

    pub fn rexp(&self) -> Self {
        Self::from_node(Node::Rexp(self.clone()))
    }

    pub fn powi(&self, exponent: i32) -> Self {
        Self::from_node(Node::Pow(self.clone(), exponent))
    }

    pub fn powf(&self, exponent: f64) -> Self {
        Self::from_node(Node::Powf(self.clone(), exponent))
    }

    pub fn smoothstep(&self, k: u32) -> Self {
        Self::from_node(Node::Smoothstep(self.clone(), k))
    }

    pub fn integral(
        integrand: Expression,
        axis: usize,
        lambda: Complex64,
        quadrature: QuadratureConfig,
    ) -> Self {
        Self::from_node(Node::Integral(IntegralNode {
            integrand,
            axis,
            lambda,
            quadrature,
        }))
    }

    pub fn compose(outer: Expression, args: Vec<Expression>) -> Self {
        Self::from_node(Node::Compose(outer, args))
    }

    /// `Σ_k coeffs[k] x_k`, omitting zero terms and unit factors.
    pub fn linear_form(coeffs: &[f64]) -> Self {
        let mut acc: Option<Expression> = None;
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = if c == 1.0 {
                Expression::var(k)
            } else if c == -1.0 {
                -Expression::var(k)
            } else {
                Expression::real(c) * Expression::var(k)
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or_else(Expression::zero)
    }

    /// The constant value, when the whole tree is a single constant node.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Structural test for the zero constant.
    pub fn is_zero(&self) -> bool {
        self.as_constant().is_some_and(|c| c.norm_sqr() == 0.0)
    }

    /// Number of free variables the tree refers to (`max index + 1`).
    ///
    /// Variables inside `Integral` integrands and `Compose` outers refer to
    /// their own argument list and do not count.
    pub fn arity(&self) -> usize {
        match self.node() {
            Node::Var(i) => i + 1,
            Node::Const(_) => 0,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Powf(a, _)
            | Node::Exp(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Recip(a)
            | Node::Rexp(a)
            | Node::Smoothstep(a, _) => a.arity(),
            Node::Integral(node) => node.integrand.arity().max(node.axis + 1),
            Node::Compose(_, args) => args.iter().map(Expression::arity).max().unwrap_or(0),
        }
    }

    /// Replaces every free variable `x_i` by `args[i]`.
    pub fn substitute(&self, args: &[Expression]) -> Expression {
        let s = |e: &Expression| e.substitute(args);
        let node = match self.node() {
            Node::Var(i) => return args[*i].clone(),
            Node::Const(_) => return self.clone(),
            Node::Add(a, b) => Node::Add(s(a), s(b)),
            Node::Sub(a, b) => Node::Sub(s(a), s(b)),
            Node::Mul(a, b) => Node::Mul(s(a), s(b)),
            Node::Div(a, b) => Node::Div(s(a), s(b)),
            Node::Neg(a) => Node::Neg(s(a)),
            Node::Pow(a, n) => Node::Pow(s(a), *n),
            Node::Powf(a, p) => Node::Powf(s(a), *p),
            Node::Exp(a) => Node::Exp(s(a)),
            Node::Sin(a) => Node::Sin(s(a)),
            Node::Cos(a) => Node::Cos(s(a)),
            Node::Recip(a) => Node::Recip(s(a)),
            Node::Rexp(a) => Node::Rexp(s(a)),
            Node::Smoothstep(a, k) => Node::Smoothstep(s(a), *k),
            Node::Integral(_) => Node::Compose(self.clone(), args.to_vec()),
            Node::Compose(outer, inner) => Node::Compose(outer.clone(), inner.iter().map(s).collect()),
        };
        Expression::from_node(node)
    }

    /// Replaces `x_axis` by the constant `value`, leaving other variables.
    pub fn fix_variable(&self, axis: usize, value: f64, dim: usize) -> Expression {
        let args: Vec<Expression> = (0..dim)
            .map(|i| {
                if i == axis {
                    Expression::real(value)
                } else {
                    Expression::var(i)
                }
            })
            .collect();
        self.substitute(&args)
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Var(_) | Node::Const(_) => 0,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.size() + b.size(),
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Powf(a, _)
            | Node::Exp(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Recip(a)
            | Node::Rexp(a)
            | Node::Smoothstep(a, _) => a.size(),
            Node::Integral(node) => node.integrand.size(),
            Node::Compose(outer, args) => outer.size() + args.iter().map(Expression::size).sum::<usize>(),
        }
    }
}

impl From<f64> for Expression {
    fn from(value: f64) -> Self {
        Expression::real(value)
    }
}

impl From<Complex64> for Expression {
    fn from(value: Complex64) -> Self {
        Expression::constant(value)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::from_node(Node::$variant(self, rhs))
            }
        }
        impl ops::$trait<&Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                Expression::from_node(Node::$variant(self.clone(), rhs.clone()))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::from_node(Node::Neg(self))
    }
}

impl ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::from_node(Node::Neg(self.clone()))
    }
}

/// Sum that folds structural zeros.
pub(crate) fn add_folded(a: Expression, b: Expression) -> Expression {
    match (a.is_zero(), b.is_zero()) {
        (true, _) => b,
        (_, true) => a,
        _ => a + b,
    }
}

/// Product that folds structural zeros and ones.
pub(crate) fn mul_folded(a: Expression, b: Expression) -> Expression {
    let one = |e: &Expression| e.as_constant() == Some(Complex64::new(1.0, 0.0));
    if a.is_zero() || b.is_zero() {
        Expression::zero()
    } else if one(&a) {
        b
    } else if one(&b) {
        a
    } else {
        a * b
    }
}
