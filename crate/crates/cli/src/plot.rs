//! Generated matplotlib scripts. Runs emit data and the script, never images.

/// What each figure reads.
pub enum Figure<'a> {
    /// Objective values and `‖d‖` against `k` from a trace CSV.
    Trace { file: &'a str, title: &'a str },
    /// `f1` against `f2` from front CSVs, one series per file.
    Fronts { files: &'a [&'a str] },
    /// Iterations per `gamma` and method from the comparison CSV.
    Comparison { file: &'a str },
    /// Error against `k` per seed from a long-format CSV `seed,k,error`.
    Errors { file: &'a str },
    /// Stage-end error against the stage regularizer per seed.
    Stages { file: &'a str },
}

pub fn script(figures: &[Figure<'_>]) -> String {
    let mut out = String::from(
        "#!/usr/bin/env python3\n\"\"\"Plots the CSV files in this directory. Usage: python3 plot.py\"\"\"\n\
         import csv\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n\
         HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n\
         def rows(name):\n    with open(os.path.join(HERE, name)) as fh:\n        return list(csv.DictReader(fh))\n\n\n",
    );
    for (i, fig) in figures.iter().enumerate() {
        let png = format!("figure_{i}.png");
        let body = match fig {
            Figure::Trace { file, title } => format!(
                "data = rows({file:?})\nk = [int(r[\"k\"]) for r in data]\n\
                 fig, (top, bottom) = plt.subplots(2, 1, sharex=True)\n\
                 for key in [c for c in data[0] if c.startswith(\"f_\")]:\n    top.plot(k, [float(r[key]) for r in data], label=key)\n\
                 top.legend()\ntop.set_title({title:?})\n\
                 bottom.semilogy(k, [max(float(r[\"norm_d\"]), 1e-300) for r in data])\nbottom.set_xlabel(\"k\")\nbottom.set_ylabel(\"|d|\")\n"
            ),
            Figure::Fronts { files } => {
                let mut s = String::from("fig, ax = plt.subplots()\n");
                for f in *files {
                    s.push_str(&format!(
                        "data = rows({f:?})\nax.scatter([float(r[\"f1\"]) for r in data], [float(r[\"f2\"]) for r in data], s=10, label={f:?})\n"
                    ));
                }
                s.push_str("ax.set_xlabel(\"f1\")\nax.set_ylabel(\"f2\")\nax.legend()\n");
                s
            }
            Figure::Comparison { file } => format!(
                "data = rows({file:?})\nfig, ax = plt.subplots()\n\
                 for method in sorted({{r[\"method\"] for r in data}}):\n    sub = [r for r in data if r[\"method\"] == method]\n\
                 \x20   ax.plot([float(r[\"gamma\"]) for r in sub], [int(r[\"iterations\"]) for r in sub], \"o-\", label=method)\n\
                 ax.set_xscale(\"log\")\nax.set_xlabel(\"gamma\")\nax.set_ylabel(\"iterations\")\nax.legend()\n"
            ),
            Figure::Errors { file } => format!(
                "data = rows({file:?})\nfig, ax = plt.subplots()\n\
                 for seed in sorted({{int(r[\"seed\"]) for r in data}}):\n    sub = [r for r in data if int(r[\"seed\"]) == seed]\n\
                 \x20   ax.semilogy([int(r[\"k\"]) for r in sub], [max(float(r[\"error\"]), 1e-300) for r in sub], lw=0.8)\n\
                 ax.set_xlabel(\"k\")\nax.set_ylabel(\"error\")\n"
            ),
            Figure::Stages { file } => format!(
                "data = rows({file:?})\nfig, ax = plt.subplots()\n\
                 for seed in sorted({{int(r[\"seed\"]) for r in data}}):\n    sub = [r for r in data if int(r[\"seed\"]) == seed]\n\
                 \x20   ax.semilogy([float(r[\"gamma\"]) for r in sub], [float(r[\"end_error\"]) for r in sub], \"o-\", lw=0.8)\n\
                 ax.set_xscale(\"log\")\nax.set_xlabel(\"gamma\")\nax.set_ylabel(\"stage-end error\")\n"
            ),
        };
        out.push_str(&body);
        out.push_str(&format!(
            "fig.savefig(os.path.join(HERE, {png:?}), dpi=120)\nplt.close(fig)\n\n"
        ));
    }
    out
}
