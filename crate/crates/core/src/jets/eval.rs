use num_complex::Complex64;
use thiserror::Error;

use super::expr::{Expression, Node};
use super::jet::{Jet, JetError, Kernel};
use crate::inverse;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("singular evaluation of {subtree}")]
    Singular { subtree: String },
    #[error("{kernel} undefined at {value} in {subtree}")]
    Domain {
        kernel: &'static str,
        value: Complex64,
        subtree: String,
    },
    #[error("variable x{index} referenced but only {dim} coordinates supplied")]
    UnboundVariable { index: usize, dim: usize },
    #[error("expression evaluated at a non-real point {value} where a real point is required")]
    NonRealPoint { value: Complex64 },
    #[error("quadrature did not reach tolerance {tol:e}; achieved estimate {estimate:e}")]
    Quadrature { estimate: f64, tol: f64 },
    #[error("no symbolic derivative for {node}")]
    Unsupported { node: String },
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn kernel_error(err: JetError, subtree: &Expression) -> EvalError {
    match err {
        JetError::Domain { kernel, value } => {
            if kernel == "recip" {
                EvalError::Singular {
                    subtree: subtree.to_string(),
                }
            } else {
                EvalError::Domain {
                    kernel,
                    value,
                    subtree: subtree.to_string(),
                }
            }
        }
        other => EvalError::Jet(other),
    }
}

fn real_point(values: &[Complex64]) -> Result<Vec<f64>, EvalError> {
    values
        .iter()
        .map(|v| {
            if v.im.abs() <= 1e-14 * v.re.abs().max(1.0) {
                Ok(v.re)
            } else {
                Err(EvalError::NonRealPoint { value: *v })
            }
        })
        .collect()
}

impl Expression {
    /// Value at a real point.
    pub fn eval(&self, point: &[f64]) -> Result<Complex64, EvalError> {
        let inputs: Vec<Complex64> = point.iter().map(|&x| x.into()).collect();
        self.eval_with(&inputs)
    }

    /// Value with (possibly complex) inputs bound to the variables.
    pub fn eval_with(&self, inputs: &[Complex64]) -> Result<Complex64, EvalError> {
        let unary = |a: &Expression, kernel: Kernel| -> Result<Complex64, EvalError> {
            let u = a.eval_with(inputs)?;
            kernel.eval(u).map_err(|e| kernel_error(e, self))
        };
        Ok(match self.node() {
            Node::Var(i) => *inputs.get(*i).ok_or(EvalError::UnboundVariable {
                index: i + 1,
                dim: inputs.len(),
            })?,
            Node::Const(c) => *c,
            Node::Add(a, b) => a.eval_with(inputs)? + b.eval_with(inputs)?,
            Node::Sub(a, b) => a.eval_with(inputs)? - b.eval_with(inputs)?,
            Node::Mul(a, b) => a.eval_with(inputs)? * b.eval_with(inputs)?,
            Node::Div(a, b) => {
                let num = a.eval_with(inputs)?;
                let den = b.eval_with(inputs)?;
                if den.norm_sqr() == 0.0 {
                    return Err(EvalError::Singular {
                        subtree: self.to_string(),
                    });
                }
                num / den
            }
            Node::Neg(a) => -a.eval_with(inputs)?,
            Node::Pow(a, n) => {
                let u = a.eval_with(inputs)?;
                if *n < 0 && u.norm_sqr() == 0.0 {
                    return Err(EvalError::Singular {
                        subtree: self.to_string(),
                    });
                }
                u.powi(*n)
            }
            Node::Powf(a, s) => unary(a, Kernel::Powf(*s))?,
            Node::Exp(a) => unary(a, Kernel::Exp)?,
            Node::Sin(a) => unary(a, Kernel::Sin)?,
            Node::Cos(a) => unary(a, Kernel::Cos)?,
            Node::Recip(a) => unary(a, Kernel::Recip)?,
            Node::Rexp(a) => unary(a, Kernel::Rexp)?,
            Node::Smoothstep(a, k) => unary(a, Kernel::Smoothstep(*k))?,
            Node::Integral(node) => {
                let point = real_point(inputs)?;
                inverse::stilde_apply(
                    &node.integrand,
                    node.axis,
                    node.lambda,
                    &point,
                    &node.quadrature,
                )?
            }
            Node::Compose(outer, args) => {
                let values = args
                    .iter()
                    .map(|a| a.eval_with(inputs))
                    .collect::<Result<Vec<_>, _>>()?;
                outer.eval_with(&values)?
            }
        })
    }

    /// Order-`order` jet of the expression at a real point: the coefficient at
    /// `α` is `D^α F(point)/α!`.
    pub fn jet(&self, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        if self.arity() > point.len() {
            return Err(EvalError::UnboundVariable {
                index: self.arity(),
                dim: point.len(),
            });
        }
        let inputs = Jet::coordinates(point, order);
        self.jet_with(&inputs)
    }

    /// Jet of `F(y(x))` where `inputs[i]` is the jet of `y_i` in `x`.
    pub fn jet_with(&self, inputs: &[Jet]) -> Result<Jet, EvalError> {
        let template = inputs.first().ok_or(EvalError::UnboundVariable { index: 1, dim: 0 })?;
        let unary = |a: &Expression, kernel: Kernel| -> Result<Jet, EvalError> {
            let u = a.jet_with(inputs)?;
            u.compose_univariate(kernel).map_err(|e| kernel_error(e, self))
        };
        Ok(match self.node() {
            Node::Var(i) => inputs
                .get(*i)
                .ok_or(EvalError::UnboundVariable {
                    index: i + 1,
                    dim: inputs.len(),
                })?
                .clone(),
            Node::Const(c) => template.constant_like(*c),
            Node::Add(a, b) => a.jet_with(inputs)?.add(&b.jet_with(inputs)?)?,
            Node::Sub(a, b) => a.jet_with(inputs)?.sub(&b.jet_with(inputs)?)?,
            Node::Mul(a, b) => a.jet_with(inputs)?.mul(&b.jet_with(inputs)?)?,
            Node::Div(a, b) => {
                let num = a.jet_with(inputs)?;
                let den = b.jet_with(inputs)?;
                if den.value().norm_sqr() == 0.0 {
                    return Err(EvalError::Singular {
                        subtree: self.to_string(),
                    });
                }
                num.mul(&den.compose_univariate(Kernel::Recip)?)?
            }
            Node::Neg(a) => a.jet_with(inputs)?.neg(),
            Node::Pow(a, n) => {
                let u = a.jet_with(inputs)?;
                if *n >= 0 {
                    u.powi(*n as u32)?
                } else {
                    if u.value().norm_sqr() == 0.0 {
                        return Err(EvalError::Singular {
                            subtree: self.to_string(),
                        });
                    }
                    u.compose_univariate(Kernel::Recip)?.powi(n.unsigned_abs())?
                }
            }
            Node::Powf(a, s) => unary(a, Kernel::Powf(*s))?,
            Node::Exp(a) => unary(a, Kernel::Exp)?,
            Node::Sin(a) => unary(a, Kernel::Sin)?,
            Node::Cos(a) => unary(a, Kernel::Cos)?,
            Node::Recip(a) => unary(a, Kernel::Recip)?,
            Node::Rexp(a) => unary(a, Kernel::Rexp)?,
            Node::Smoothstep(a, k) => unary(a, Kernel::Smoothstep(*k))?,
            Node::Integral(node) => {
                let values: Vec<Complex64> = inputs.iter().map(Jet::value).collect();
                let point = real_point(&values)?;
                let local = inverse::stilde_jet(
                    &node.integrand,
                    node.axis,
                    node.lambda,
                    &point,
                    template.order(),
                    &node.quadrature,
                )?;
                if is_identity(inputs) {
                    local
                } else {
                    local.compose(inputs)?
                }
            }
            Node::Compose(outer, args) => {
                let inner = args
                    .iter()
                    .map(|a| a.jet_with(inputs))
                    .collect::<Result<Vec<_>, _>>()?;
                outer.jet_with(&inner)?
            }
        })
    }
}

/// True when `inputs` are exactly the coordinate jets at their base point.
fn is_identity(inputs: &[Jet]) -> bool {
    let first = &inputs[0];
    if first.dim() != inputs.len() {
        return false;
    }
    let coords = Jet::coordinates(first.base_point(), first.order());
    coords.iter().zip(inputs).all(|(a, b)| a == b)
}
