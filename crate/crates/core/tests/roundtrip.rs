use proptest::prelude::*;
use vpedit_core::dsl::{parse, parse_text, tokens_from_str, tokens_to_string, Domain};
use vpedit_core::edit::{apply_with_inverse, apply_edit, enumerate_edits, EnumConfig};
use vpedit_core::exec::{decode_visual, encode_visual};
use vpedit_core::execute;
use vpedit_core::sampler::{sample_programs, SamplerConfig};

fn domain() -> impl Strategy<Value = Domain> {
    prop_oneof![Just(Domain::Layout), Just(Domain::Csg2d), Just(Domain::Csg3d)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_and_tokens_round_trip(d in domain(), seed in any::<u64>()) {
        let p = sample_programs(&SamplerConfig::new(d, seed), 1).unwrap().remove(0);
        let q = p.quant();
        prop_assert_eq!(&parse_text(&p.to_text(), d, q).unwrap(), &p);
        let toks = tokens_from_str(&tokens_to_string(&p.tokens())).unwrap();
        prop_assert_eq!(&parse(&toks, d, q).unwrap(), &p);
    }

    #[test]
    fn visuals_round_trip(d in domain(), seed in any::<u64>()) {
        let p = sample_programs(&SamplerConfig::new(d, seed), 1).unwrap().remove(0);
        let v = execute(&p).unwrap();
        prop_assert_eq!(decode_visual(&encode_visual(&v), d).unwrap(), v);
    }

    #[test]
    fn enumerated_edits_invert(d in domain(), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let p = sample_programs(&SamplerConfig::new(d, seed), 1).unwrap().remove(0);
        let edits = enumerate_edits(&p, &EnumConfig::new(d, seed));
        prop_assume!(!edits.is_empty());
        let op = pick.get(&edits);
        if let Ok((q, inv)) = apply_with_inverse(&p, op) {
            prop_assert_eq!(apply_edit(&q, &inv).unwrap(), p);
        }
    }
}
