//! The evaluation morphism: pairing level-`i` chains with the values of the
//! component functions, level by level, as exact linear forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::EvError;
use crate::graph::{HalfEdge, LevelStructure, MarkedDualGraph};
use crate::homology::{level_filtration, restrict_to_level, LevelChain};
use crate::linalg::{ConstraintSpace, LinearForm};
use crate::twr::{Decoration, PointRef};

/// Values of the component functions at finite points.
///
/// By default every non-pole node point and every unlabeled leg carries its
/// own unknown named `vertex:point`, marked zeros carry 0, and explicit values
/// in the decoration take precedence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValueAssignment {
    values: BTreeMap<PointRef, LinearForm>,
}

pub fn unknown_name(graph: &MarkedDualGraph, dec: &Decoration, p: PointRef) -> String {
    let v = dec.point_vertex(graph, p);
    format!("{}:{}", graph.vertices()[v].id, dec.point_id(graph, p))
}

impl ValueAssignment {
    pub fn symbolic(graph: &MarkedDualGraph, dec: &Decoration) -> Result<Self, EvError> {
        let mut values = BTreeMap::new();
        for e in 0..graph.edge_count() {
            for side in 0..2 {
                let p = PointRef::Half(HalfEdge::new(e, side));
                if !dec.order_at(p).is_pole() {
                    values.insert(p, LinearForm::unknown(&unknown_name(graph, dec, p)));
                }
            }
        }
        for (l, leg) in graph.legs().iter().enumerate() {
            let p = PointRef::Leg(l);
            match leg.mu.signum() {
                1 => {
                    values.insert(p, LinearForm::zero());
                }
                0 => {
                    values.insert(p, LinearForm::unknown(&unknown_name(graph, dec, p)));
                }
                _ => {}
            }
        }
        for (p, v) in &dec.values {
            if dec.order_at(*p).is_pole() {
                return Err(EvError::ValueAtPole(dec.point_id(graph, *p)));
            }
            values.insert(*p, v.clone());
        }
        Ok(ValueAssignment { values })
    }

    pub fn get(&self, p: PointRef) -> Option<&LinearForm> {
        self.values.get(&p)
    }

    pub fn insert(&mut self, p: PointRef, value: LinearForm) {
        self.values.insert(p, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PointRef, &LinearForm)> {
        self.values.iter()
    }

    /// Every unknown used by some value.
    pub fn unknowns(&self) -> Vec<String> {
        self.values
            .values()
            .flat_map(|f| f.unknowns().map(str::to_string))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// `sum_x c_x f_v(x)` over the cells of a level chain: every maximal
/// single-vertex segment contributes its exit value minus its entry value.
pub fn evaluate(
    chain: &LevelChain,
    graph: &MarkedDualGraph,
    dec: &Decoration,
    values: &ValueAssignment,
) -> Result<LinearForm, EvError> {
    let mut out = LinearForm::zero();
    for (&p, &c) in &chain.cells {
        if dec.order_at(p).is_pole() {
            return Err(EvError::ValueAtPole(dec.point_id(graph, p)));
        }
        let v = values
            .get(p)
            .ok_or_else(|| EvError::MissingValue(dec.point_id(graph, p)))?;
        out.add_scaled(v, &crate::linalg::q(c));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vanishing {
    /// Every form is identically zero.
    Yes,
    /// Some form is a non-zero constant.
    No,
    /// Vanishing holds exactly on a proper affine subspace of the unknowns.
    Conditional,
}

impl fmt::Display for Vanishing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vanishing::Yes => "true",
            Vanishing::No => "false",
            Vanishing::Conditional => "conditional",
        })
    }
}

/// The forms `ev^{(i)}(γ)` over the generators of `L_{<=i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelEvaluation {
    pub level: i64,
    pub forms: Vec<LinearForm>,
    pub space: ConstraintSpace,
}

impl LevelEvaluation {
    pub fn vanishing(&self) -> Vanishing {
        if self.forms.iter().all(LinearForm::is_zero) {
            Vanishing::Yes
        } else if !self.space.is_consistent() {
            Vanishing::No
        } else {
            Vanishing::Conditional
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationSystem {
    pub levels: Vec<LevelEvaluation>,
    pub unknowns: Vec<String>,
}

impl EvaluationSystem {
    pub fn level(&self, i: i64) -> Option<&LevelEvaluation> {
        self.levels.iter().find(|l| l.level == i)
    }

    /// All forms at all levels.
    pub fn all_forms(&self) -> Vec<LinearForm> {
        self.levels.iter().flat_map(|l| l.forms.iter().cloned()).collect()
    }

    /// The joint solution space over every unknown of the assignment.
    pub fn combined(&self) -> ConstraintSpace {
        ConstraintSpace::over(&self.all_forms(), &self.unknowns)
    }

    /// Joint space with additional constraints.
    pub fn combined_with(&self, extra: &[LinearForm]) -> ConstraintSpace {
        let mut forms = self.all_forms();
        forms.extend(extra.iter().cloned());
        let mut unknowns = self.unknowns.clone();
        unknowns.extend(extra.iter().flat_map(|f| f.unknowns().map(str::to_string)));
        ConstraintSpace::over(&forms, &unknowns)
    }
}

pub fn evaluation_system(
    graph: &MarkedDualGraph,
    levels: &LevelStructure,
    dec: &Decoration,
) -> Result<EvaluationSystem, EvError> {
    let values = ValueAssignment::symbolic(graph, dec)?;
    evaluation_system_with(graph, levels, dec, &values)
}

pub fn evaluation_system_with(
    graph: &MarkedDualGraph,
    levels: &LevelStructure,
    dec: &Decoration,
    values: &ValueAssignment,
) -> Result<EvaluationSystem, EvError> {
    let filtration = level_filtration(graph, levels);
    let mut out = Vec::new();
    for (i, gens) in &filtration.steps {
        let forms = gens
            .iter()
            .map(|c| evaluate(&restrict_to_level(c, graph, levels, *i)?, graph, dec, values))
            .collect::<Result<Vec<_>, _>>()?;
        let space = ConstraintSpace::new(&forms);
        out.push(LevelEvaluation {
            level: *i,
            forms,
            space,
        });
    }
    Ok(EvaluationSystem {
        levels: out,
        unknowns: values.unknowns(),
    })
}

/// The forms `f(x) = 0` for every non-leg point declared a zero of `f`.
pub fn kind_zero_forms(graph: &MarkedDualGraph, dec: &Decoration, values: &ValueAssignment) -> Vec<LinearForm> {
    let mut out = Vec::new();
    for e in 0..graph.edge_count() {
        for side in 0..2 {
            let p = PointRef::Half(HalfEdge::new(e, side));
            if dec.order_at(p).kind == crate::twr::PointKind::Zero {
                if let Some(v) = values.get(p) {
                    out.push(v.clone());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::dollar;
    use crate::graph::GraphBuilder;
    use crate::twr::PointOrder;

    fn forms(list: &[&str]) -> ConstraintSpace {
        ConstraintSpace::new(&list.iter().map(|s| s.parse().unwrap()).collect::<Vec<LinearForm>>())
    }

    #[test]
    fn dollar_fiber_condition() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let dec = Decoration::from_halves(&g, vec![[PointOrder::regular(1), PointOrder::pole(1)]; 3]);
        let sys = evaluation_system(&g, &levels, &dec).unwrap();
        let top = sys.level(0).unwrap();
        assert_eq!(top.vanishing(), Vanishing::Conditional);
        assert!(top
            .space
            .same_solutions(&forms(&["?v1:q1.0 - ?v1:q2.0", "?v1:q2.0 - ?v1:q3.0"])));
        assert_eq!(top.space.dimension(), Some(1));
        assert_eq!(sys.level(-1).unwrap().vanishing(), Vanishing::Yes);
    }

    #[test]
    fn horizontal_example_forces_zeros() {
        let g = GraphBuilder::new()
            .vertex("v1", 1)
            .vertex("v2", 0)
            .vertex("v3", 0)
            .edge("q1", "v1", "v2")
            .edge("q2", "v1", "v3")
            .edge("q3", "v2", "v3")
            .leg("z1", "v1", 1)
            .leg("p", "v1", -3)
            .leg("z2", "v2", 1)
            .leg("z3", "v3", 1)
            .build()
            .unwrap();
        let levels = LevelStructure::normalized(&[0, -1, -1]);
        let zp = [PointOrder::zero(1), PointOrder::pole(1)];
        let rr = [PointOrder::regular(1), PointOrder::regular(1)];
        let dec = Decoration::from_halves(&g, vec![zp, zp, rr]);
        let sys = evaluation_system(&g, &levels, &dec).unwrap();
        assert!(sys
            .level(0)
            .unwrap()
            .space
            .same_solutions(&forms(&["?v1:q1.0", "?v1:q2.0"])));
        assert!(sys
            .level(-1)
            .unwrap()
            .space
            .same_solutions(&forms(&["?v2:q3.0 - ?v3:q3.1"])));
    }

    #[test]
    fn concrete_values_decide() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let mut dec = Decoration::from_halves(&g, vec![[PointOrder::regular(1), PointOrder::pole(1)]; 3]);
        for e in 0..3 {
            dec.values.insert(
                PointRef::Half(HalfEdge::new(e, 0)),
                LinearForm::constant(crate::linalg::q(5)),
            );
        }
        let sys = evaluation_system(&g, &levels, &dec).unwrap();
        assert_eq!(sys.level(0).unwrap().vanishing(), Vanishing::Yes);
        dec.values.insert(
            PointRef::Half(HalfEdge::new(2, 0)),
            LinearForm::constant(crate::linalg::q(6)),
        );
        let sys = evaluation_system(&g, &levels, &dec).unwrap();
        assert_eq!(sys.level(0).unwrap().vanishing(), Vanishing::No);
    }

    #[test]
    fn value_at_pole_is_an_error() {
        let g = dollar();
        let mut dec = Decoration::from_halves(&g, vec![[PointOrder::regular(1), PointOrder::pole(1)]; 3]);
        dec.values
            .insert(PointRef::Half(HalfEdge::new(0, 1)), LinearForm::zero());
        assert_eq!(
            ValueAssignment::symbolic(&g, &dec).unwrap_err(),
            EvError::ValueAtPole("q1.1".into())
        );
    }

    #[test]
    fn missing_value_names_the_point() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let dec = Decoration::from_halves(&g, vec![[PointOrder::regular(1), PointOrder::pole(1)]; 3]);
        let err = evaluation_system_with(&g, &levels, &dec, &ValueAssignment::default()).unwrap_err();
        assert!(matches!(err, EvError::MissingValue(p) if p.starts_with('q')));
    }
}
