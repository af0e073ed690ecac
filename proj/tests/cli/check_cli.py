"""End-to-end checks of the denoise-lab executable: outputs, SVG validity, determinism, exit codes."""

import pathlib
import shutil
import subprocess
import sys
import xml.etree.ElementTree as ET

SVG_NS = "{http://www.w3.org/2000/svg}"
LABELS = ["Identity", "Bayes", "T1", "T2"]
COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"]

failures = []


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def run(exe, *args):
    proc = subprocess.run([exe, *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout + proc.stderr


def write(path, text):
    path.write_text(text)
    return str(path)


def check_svg(path):
    root = ET.parse(path).getroot()
    check(root.tag == SVG_NS + "svg", f"{path.name}: root element is svg")
    check(root.get("width") == "800" and root.get("height") == "600", f"{path.name}: 800x600")
    texts = [t.text or "" for t in root.iter(SVG_NS + "text")]
    return root, texts


def main():
    exe, work = sys.argv[1], pathlib.Path(sys.argv[2])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)

    sweep_cfg = write(work / "sweep.yaml", "\n".join([
        "experiment: sweep",
        "signal: {kind: normal, dim: 1}",
        "etas: [0.02, 0.04, 0.08, 0.16]",
        "n_test: 500",
        "seed: 5",
        "out_dir: ignored",
        "",
    ]))
    outs = []
    for tag in ("a", "b"):
        out = work / f"sweep_{tag}"
        code, log = run(exe, "sweep", "--config", sweep_cfg, "--out", str(out))
        check(code == 0, f"sweep run {tag} exits 0 (got {code}) {log.strip()[-200:]}")
        outs.append(out)
    a, b = outs
    check((a / "sweep.csv").is_file(), "sweep.csv written")
    check((a / "manifest.txt").is_file(), "manifest.txt written")
    header = (a / "sweep.csv").read_text().splitlines()[0]
    check(header.startswith("eta,denoiser"), f"sweep.csv header: {header}")
    for f in sorted(a.glob("*.csv")):
        check(f.read_bytes() == (b / f.name).read_bytes(), f"{f.name} identical across reruns")
    manifest = (a / "manifest.txt").read_text()
    check("config_hash fnv1a64:" in manifest, "manifest has config hash")
    check(manifest == (b / "manifest.txt").read_text(), "manifest identical across reruns")

    svgs = sorted(a.glob("*.svg"))
    check(len(svgs) == 3, f"three sweep plots ({len(svgs)})")
    for svg in svgs:
        root, texts = check_svg(svg)
        for label in LABELS:
            check(label in texts, f"{svg.name}: legend names {label}")
        check("eta" in texts, f"{svg.name}: x axis label")
        strokes = {p.get("stroke") for p in root.iter(SVG_NS + "polyline")}
        check(strokes == set(COLORS), f"{svg.name}: series colors {sorted(strokes)}")

    code, _ = run(exe, "sweep", "--config", sweep_cfg, "--seed", "6", "--out", str(work / "seed6"))
    check(code == 0, "seed override runs")
    check((work / "seed6" / "sweep.csv").read_bytes() != (a / "sweep.csv").read_bytes(),
          "a different seed changes the sampled columns")

    code, log = run(exe, "demo2d", "--eta", "0.5", "--out", str(work / "demo2d"))
    check(code == 0, f"demo2d with defaults exits 0 (got {code})")
    for svg in sorted((work / "demo2d").glob("*.svg")):
        check_svg(svg)

    code, log = run(exe, "verify", "--out", str(work / "verify"))
    check(code == 0, f"verify exits 0 (got {code})")
    check("FAIL" not in log, "verify reports no failed check")

    # exit 2: configuration errors
    bad = write(work / "bad.yaml", "experiment: sweep\nsignal: {kind: normal}\nfoo: 1\n")
    code, log = run(exe, "sweep", "--config", bad, "--out", str(work / "bad"))
    check(code == 2 and "'foo'" in log, f"unknown key exits 2 naming the field (got {code})")
    code, _ = run(exe, "sweep", "--config", str(work / "missing.yaml"))
    check(code == 2, f"missing config file exits 2 (got {code})")
    code, _ = run(exe, "sweep", "--eta", "abc")
    check(code == 2, f"non-numeric --eta exits 2 (got {code})")
    code, _ = run(exe, "ma", "--eta", "0.1", "--out", str(work / "ma_one"))
    check(code == 2, f"single eta for a slope experiment exits 2 (got {code})")
    code, _ = run(exe, "frobnicate")
    check(code == 2, f"unknown subcommand exits 2 (got {code})")
    code, _ = run(exe, "sweep", "--config", sweep_cfg, "--bogus")
    check(code == 2, f"unknown flag exits 2 (got {code})")

    # exit 3: a narrow bimodal law makes the first-order Jacobian singular between modes
    violating = write(work / "violating.yaml", "\n".join([
        "experiment: ma",
        "signal:",
        "  kind: mixture",
        "  components:",
        "    - {weight: 0.5, mean: [-3.0], cov: [[0.2]]}",
        "    - {weight: 0.5, mean: [3.0], cov: [[0.2]]}",
        "etas: [0.5, 1.0, 1.5, 2.0]",
        "",
    ]))
    code, log = run(exe, "ma", "--config", violating, "--out", str(work / "violating"))
    check(code == 3, f"assumption violation exits 3 (got {code})")
    check((work / "violating" / "ma.csv").is_file(), "violating run still writes its CSV")

    # exit 4: a non-finite training loss
    diverging = write(work / "diverging.yaml", "\n".join([
        "experiment: scorematch",
        "signal: gauss",
        "n_train: 256",
        "n_test: 100",
        "train: {lr: 1.0e+300, epochs: 2, width: 8, blocks: 1}",
        "",
    ]))
    code, log = run(exe, "scorematch", "--config", diverging, "--out", str(work / "diverging"))
    check(code == 4, f"training divergence exits 4 (got {code}) {log.strip()[-200:]}")

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
