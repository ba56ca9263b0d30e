//! Named scenarios shipped with the tool.

pub const PRESETS: &[(&str, &str)] = &[
    ("default", include_str!("../../../scenarios/default.toml")),
    ("fig2", include_str!("../../../scenarios/fig2.toml")),
    ("fig3", include_str!("../../../scenarios/fig3.toml")),
    ("fig4", include_str!("../../../scenarios/fig4.toml")),
    ("fig5", include_str!("../../../scenarios/fig5.toml")),
    ("fig6", include_str!("../../../scenarios/fig6.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioFile;

    #[test]
    fn every_preset_parses_and_validates() {
        for (name, text) in PRESETS {
            let file = ScenarioFile::parse(text, name).unwrap();
            assert_eq!(file.name, *name);
            let spec = file.experiment().unwrap();
            let mut quick = spec.clone();
            // skip the correlation PSD checks on every point; one is enough here
            quick.grid.truncate(1);
            assert!(quick.violations().is_empty(), "{name}: {:?}", quick.violations());
        }
    }

    #[test]
    fn figure_grids_have_expected_sizes() {
        let size = |n: &str| ScenarioFile::parse(preset(n).unwrap(), n).unwrap().experiment().unwrap().grid.len();
        assert_eq!(size("fig2"), 30);
        assert_eq!(size("fig3"), 5);
        assert_eq!(size("fig4"), 15);
        assert_eq!(size("fig5"), 8);
        assert_eq!(size("fig6"), 20);
        assert!(preset("fig7").is_none());
    }
}
