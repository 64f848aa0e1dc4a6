use std::ops::RangeInclusive;

use super::{Axis, Domain, Func, Param, Quant, Shape};

/// Symmetry counts are integers strictly between 1 and 6.
pub const COUNT_RANGE: RangeInclusive<u8> = 2..=5;

/// Kind of a non-shape argument slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamSlot {
    Quant,
    Axis,
    Color,
    Count,
    Shape,
}

use ParamSlot as S;

pub fn combinators(domain: Domain) -> &'static [Func] {
    match domain {
        Domain::Layout => &[Func::Union],
        Domain::Csg2d | Domain::Csg3d => &[Func::Union, Func::Difference, Func::Intersection],
    }
}

pub fn transforms(domain: Domain) -> &'static [Func] {
    match domain {
        Domain::Layout => &[
            Func::Move,
            Func::Scale,
            Func::Color,
            Func::SymReflect,
            Func::SymRotate,
            Func::SymTranslate,
        ],
        Domain::Csg2d | Domain::Csg3d => &[Func::Move, Func::Scale, Func::Rotate, Func::Reflect],
    }
}

pub fn shapes(domain: Domain) -> &'static [Shape] {
    match domain {
        Domain::Layout | Domain::Csg2d => &[Shape::Square, Shape::Circle, Shape::Triangle],
        Domain::Csg3d => &[Shape::Cuboid, Shape::Sphere, Shape::Cylinder],
    }
}

pub(crate) fn axes(domain: Domain) -> &'static [Axis] {
    match domain {
        Domain::Csg3d => &[Axis::X, Axis::Y, Axis::Z],
        _ => &[Axis::X, Axis::Y],
    }
}

/// Parameter slots of a transform or of `Prim`; `None` when `func` is not a
/// transform or primitive of `domain`.
pub fn signature(domain: Domain, func: Func) -> Option<&'static [ParamSlot]> {
    if func == Func::Prim {
        return Some(&[S::Shape]);
    }
    if !transforms(domain).contains(&func) {
        return None;
    }
    let three = domain == Domain::Csg3d;
    Some(match func {
        Func::Move | Func::Scale if three => &[S::Quant, S::Quant, S::Quant],
        Func::Move | Func::Scale => &[S::Quant, S::Quant],
        Func::Rotate if three => &[S::Quant, S::Quant, S::Quant],
        Func::Rotate => &[S::Quant],
        Func::Reflect | Func::SymReflect => &[S::Axis],
        Func::Color => &[S::Color],
        Func::SymRotate => &[S::Count],
        Func::SymTranslate => &[S::Count, S::Quant, S::Quant],
        _ => return None,
    })
}

pub fn param_fits(domain: Domain, quant: Quant, slot: ParamSlot, param: Param) -> bool {
    match (slot, param) {
        (S::Quant, Param::Quant(i)) => i < quant.levels(),
        (S::Axis, Param::Axis(a)) => axes(domain).contains(&a),
        (S::Color, Param::Color(_)) => true,
        (S::Count, Param::Count(n)) => COUNT_RANGE.contains(&n),
        (S::Shape, Param::Shape(s)) => shapes(domain).contains(&s),
        _ => false,
    }
}

/// Every value a slot can take, in a fixed order.
pub(crate) fn slot_values(domain: Domain, quant: Quant, slot: ParamSlot) -> Vec<Param> {
    match slot {
        S::Quant => (0..quant.levels()).map(Param::Quant).collect(),
        S::Axis => axes(domain).iter().map(|a| Param::Axis(*a)).collect(),
        S::Color => [super::ColorName::Red, super::ColorName::Green, super::ColorName::Blue]
            .into_iter()
            .map(Param::Color)
            .collect(),
        S::Count => COUNT_RANGE.map(Param::Count).collect(),
        S::Shape => shapes(domain).iter().map(|s| Param::Shape(*s)).collect(),
    }
}

/// Checks a full parameter list against a signature.
pub(crate) fn params_fit(domain: Domain, quant: Quant, func: Func, params: &[super::Param]) -> bool {
    match signature(domain, func) {
        Some(sig) => {
            sig.len() == params.len()
                && sig.iter().zip(params).all(|(s, p)| param_fits(domain, quant, *s, *p))
        }
        None => false,
    }
}
