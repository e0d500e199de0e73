//! Named experiment setups. The `-small` variants halve the grid and shorten
//! long horizons so they finish in seconds to minutes.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Spec text in the same `key = value` format as user files.
    pub text: &'static str,
    /// Keys the source experiment leaves unstated.
    pub defaulted: &'static [&'static str],
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "ch-refine",
        description: "Cahn-Hilliard time-step refinement, sine data on the unit square",
        text: "model = cahn-hilliard\nepsilon = 0.01\nlambda = 1e-3\ngamma0 = 1\n\
               Lx = 1\nNx = 256\nic = sine\nscheme = icn\ndt = 1e-3\nT = 1\n",
        defaulted: &[],
    },
    Preset {
        name: "ch-refine-small",
        description: "ch-refine on 128x128",
        text: "model = cahn-hilliard\nepsilon = 0.01\nlambda = 1e-3\ngamma0 = 1\n\
               Lx = 1\nNx = 128\nic = sine\nscheme = icn\ndt = 1e-3\nT = 1\n",
        defaulted: &[],
    },
    Preset {
        name: "ch-coarsen",
        description: "Cahn-Hilliard coarsening from small random noise on [0, 4pi]^2",
        text: "model = cahn-hilliard\nepsilon = 0.05\nlambda = 0.1\ngamma0 = 1\n\
               Lx = 12.566370614359172\nNx = 256\nic = random\namplitude = 0.001\nseed = 1\n\
               scheme = icn\ndt = 0.01\nT = 2\nsnapshot_times = 1, 2\n",
        defaulted: &["seed"],
    },
    Preset {
        name: "ch-coarsen-small",
        description: "ch-coarsen on 128x128",
        text: "model = cahn-hilliard\nepsilon = 0.05\nlambda = 0.1\ngamma0 = 1\n\
               Lx = 12.566370614359172\nNx = 128\nic = random\namplitude = 0.001\nseed = 1\n\
               scheme = icn\ndt = 0.01\nT = 2\nsnapshot_times = 1, 2\n",
        defaulted: &["seed"],
    },
    Preset {
        name: "ac-disk",
        description: "Allen-Cahn shrinking disk, R0 = 100 on [0, 256]^2",
        text: "model = allen-cahn\nepsilon = 1\nlambda = 1\ngamma0 = 1\n\
               Lx = 256\nNx = 256\nic = disk\nradius = 100\ncenter = 128, 128\n\
               scheme = icn\ndt = 0.5\nT = 1000\nsnapshot_times = 0, 500, 1000\nvolume = true\n",
        defaulted: &["gamma0", "center"],
    },
    Preset {
        name: "ac-disk-small",
        description: "ac-disk on 128x128 to t = 100",
        text: "model = allen-cahn\nepsilon = 1\nlambda = 1\ngamma0 = 1\n\
               Lx = 256\nNx = 128\nic = disk\nradius = 100\ncenter = 128, 128\n\
               scheme = icn\ndt = 0.5\nT = 100\nsnapshot_times = 0, 100\nvolume = true\n",
        defaulted: &["gamma0", "center"],
    },
    Preset {
        name: "pfc-crystal",
        description: "Phase field crystal growth from a centred crystallite on [0, 150]^2",
        text: "model = pfc\na = 0.325\nb = 0\nc = 1\nlambda = 1\ngamma0 = 1\n\
               Lx = 150\nNx = 512\nic = pfc-seed\nscheme = gauss\nstages = 2\ndt = 1\nT = 1000\n\
               snapshot_times = 10, 20, 30, 50, 100, 1000\n",
        defaulted: &["lambda", "gamma0", "dt"],
    },
    Preset {
        name: "pfc-crystal-small",
        description: "pfc-crystal on 256x256 to t = 50",
        text: "model = pfc\na = 0.325\nb = 0\nc = 1\nlambda = 1\ngamma0 = 1\n\
               Lx = 150\nNx = 256\nic = pfc-seed\nscheme = gauss\nstages = 2\ndt = 1\nT = 50\n\
               snapshot_times = 10, 20, 30, 50\n",
        defaulted: &["lambda", "gamma0", "dt"],
    },
    Preset {
        name: "mbe-coarsen",
        description: "Thin-film epitaxy with slope selection on [0, 2pi]^2",
        text: "model = mbe\nepsilon = 0.31622776601683794 # epsilon^2 = 0.1\nlambda = 1\ngamma0 = 1\n\
               Lx = 6.283185307179586\nNx = 256\nic = mbe-waves\nscheme = icn\ndt = 0.01\nT = 30\n\
               snapshot_times = 1, 10, 30\n",
        defaulted: &["gamma0", "T"],
    },
    Preset {
        name: "mbe-coarsen-small",
        description: "mbe-coarsen on 128x128 to t = 5",
        text: "model = mbe\nepsilon = 0.31622776601683794 # epsilon^2 = 0.1\nlambda = 1\ngamma0 = 1\n\
               Lx = 6.283185307179586\nNx = 128\nic = mbe-waves\nscheme = icn\ndt = 0.01\nT = 5\n\
               snapshot_times = 1, 5\n",
        defaulted: &["gamma0", "T"],
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::RunSpec;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let s = RunSpec::from_preset(p.name).unwrap();
            assert_eq!(s.preset.as_deref(), Some(p.name));
            let small = format!("{}-small", p.name);
            if let Some(q) = preset(&small) {
                let t = RunSpec::from_preset(q.name).unwrap();
                assert_eq!(2 * t.grid.nx(), s.grid.nx());
                assert!(t.t_end <= s.t_end);
                assert_eq!(t.params, s.params);
            }
        }
    }

    #[test]
    fn stated_parameters() {
        let s = RunSpec::from_preset("ac-disk").unwrap();
        assert_eq!((s.grid.lx(), s.grid.nx()), (256.0, 256));
        assert_eq!((s.params.lambda, s.params.epsilon), (1.0, 1.0));
        assert!(s.volume);
        let s = RunSpec::from_preset("mbe-coarsen").unwrap();
        assert!((s.params.epsilon.powi(2) - 0.1).abs() < 1e-15);
        let s = RunSpec::from_preset("pfc-crystal").unwrap();
        assert_eq!((s.params.a, s.params.c, s.params.b), (0.325, 1.0, 0.0));
        assert_eq!(s.grid.nx(), 512);
        assert!(s.defaulted.contains(&"lambda".to_string()));
    }
}
