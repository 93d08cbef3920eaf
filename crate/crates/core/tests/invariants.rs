use std::time::Duration;

use proptest::prelude::*;

use itnforge_core::datagen::{TemplateConfig, TemplateGenerator};
use itnforge_core::hybrid::{second_pass, CorrectionRule, HybridConfig};
use itnforge_core::{itn, tn, Grammar};

fn grammar() -> &'static Grammar {
    use std::sync::OnceLock;
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(Grammar::english)
}

#[test]
fn directory_grammar_matches_bundled() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/grammar/en");
    let loaded = Grammar::load(std::path::Path::new(dir)).unwrap();
    for s in [
        "october twenty twenty twenty",
        "four percent of five dollars is twenty cents",
        "one eight hundred two five five seven eight two eight",
        "ten twenty nine gmt november twenty ninth twenty twelve",
    ] {
        assert_eq!(itn(&loaded, s), itn(grammar(), s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn written_text_is_a_fixed_point(seed in any::<u64>(), index in 0usize..10_000) {
        let g = grammar();
        let w = TemplateGenerator::new(g, seed, TemplateConfig::default()).sentence(index);
        prop_assert_eq!(itn(g, &w), w);
    }

    #[test]
    fn second_pass_is_idempotent(seed in any::<u64>(), index in 0usize..10_000) {
        let g = grammar();
        let w = TemplateGenerator::new(g, seed, TemplateConfig::default()).sentence(index);
        let spoken = tn(g, &w).spoken.raw;
        let cfg = HybridConfig::new(0.5, Duration::from_secs(1))
            .unwrap()
            .with_rules(vec![CorrectionRule::new(r"(\d) %", "$1%").unwrap()]);
        let once = second_pass(&cfg, g, &itn(g, &spoken));
        prop_assert_eq!(second_pass(&cfg, g, &once), once);
    }
}
