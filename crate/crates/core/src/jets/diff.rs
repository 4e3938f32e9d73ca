use num_complex::Complex64;

use super::eval::EvalError;
use super::expr::{add_folded, mul_folded, Expression, Node};

impl Expression {
    /// Symbolic partial derivative `D_axis F`.
    ///
    /// Integral nodes differentiate by the transport identities:
    /// `D_l S̃F = S̃(D_l F)` for `l ≠ j`, and `D_j S̃F = F + λ S̃F`.
    /// `rexp` and `smoothstep` have no closed derivative node and are rejected.
    pub fn derivative(&self, axis: usize) -> Result<Expression, EvalError> {
        let d = |e: &Expression| e.derivative(axis);
        Ok(match self.node() {
            Node::Var(i) => {
                if *i == axis {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            Node::Const(_) => Expression::zero(),
            Node::Add(a, b) => add_folded(d(a)?, d(b)?),
            Node::Sub(a, b) => {
                let (da, db) = (d(a)?, d(b)?);
                if db.is_zero() {
                    da
                } else if da.is_zero() {
                    -db
                } else {
                    da - db
                }
            }
            Node::Mul(a, b) => add_folded(mul_folded(d(a)?, b.clone()), mul_folded(a.clone(), d(b)?)),
            Node::Div(a, b) => {
                // (a/b)' = a'/b − a b'/b²
                let (da, db) = (d(a)?, d(b)?);
                let first = if da.is_zero() { Expression::zero() } else { da / b.clone() };
                let second = if db.is_zero() {
                    Expression::zero()
                } else {
                    a.clone() * db / b.powi(2)
                };
                if second.is_zero() {
                    first
                } else if first.is_zero() {
                    -second
                } else {
                    first - second
                }
            }
            Node::Neg(a) => {
                let da = d(a)?;
                if da.is_zero() {
                    da
                } else {
                    -da
                }
            }
            Node::Pow(a, n) => {
                if *n == 0 {
                    Expression::zero()
                } else {
                    let outer = if *n == 1 {
                        Expression::one()
                    } else {
                        Expression::real(f64::from(*n)) * a.powi(n - 1)
                    };
                    mul_folded(outer, d(a)?)
                }
            }
            Node::Powf(a, s) => mul_folded(Expression::real(*s) * a.powf(s - 1.0), d(a)?),
            Node::Exp(a) => mul_folded(self.clone(), d(a)?),
            Node::Sin(a) => mul_folded(a.cos(), d(a)?),
            Node::Cos(a) => mul_folded(-a.sin(), d(a)?),
            Node::Recip(a) => mul_folded(-a.recip().powi(2), d(a)?),
            Node::Rexp(_) | Node::Smoothstep(_, _) => {
                return Err(EvalError::Unsupported {
                    node: self.to_string(),
                })
            }
            Node::Integral(node) => {
                if axis == node.axis {
                    let scaled = if node.lambda == Complex64::new(0.0, 0.0) {
                        Expression::zero()
                    } else {
                        Expression::constant(node.lambda) * self.clone()
                    };
                    add_folded(node.integrand.clone(), scaled)
                } else {
                    let inner = node.integrand.derivative(axis)?;
                    if inner.is_zero() {
                        Expression::zero()
                    } else {
                        Expression::integral(inner, node.axis, node.lambda, node.quadrature)
                    }
                }
            }
            Node::Compose(outer, args) => {
                let mut acc = Expression::zero();
                for (l, arg) in args.iter().enumerate() {
                    let darg = d(arg)?;
                    if darg.is_zero() {
                        continue;
                    }
                    let douter = outer.derivative(l)?;
                    if douter.is_zero() {
                        continue;
                    }
                    let term = mul_folded(Expression::compose(douter, args.clone()), darg);
                    acc = add_folded(acc, term);
                }
                acc
            }
        })
    }

    /// `D^α F` by repeated symbolic differentiation.
    pub fn derivative_multi(&self, alpha: &[u32]) -> Result<Expression, EvalError> {
        let mut out = self.clone();
        for (axis, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                out = out.derivative(axis)?;
            }
        }
        Ok(out)
    }
}
