"""Command-line interface for offline use.

    facexplain verify a.png b.png --out session_dir/
    facexplain explain session_dir/
    facexplain chat session_dir/
    facexplain calibrate scores.csv --out pic.json
    facexplain eval-fr scores.csv --out report.json --det-csv det.csv
    facexplain eval-qa suite.yaml session_dir/
    facexplain serve --config config.yaml

``verify`` writes the decision record and the two aligned crops into a
session directory; ``explain`` adds the saliency maps, the region table,
and the QA context; ``chat`` then answers questions about that directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .alignment import CANONICAL_TEMPLATE
from .calibration import PicModel, fit_pic, load_calibration_csv
from .config import load_config
from .context import GeneralContextInfo, QAContext, build_context
from .errors import FaceXplainError
from .evaluation import QuestionSuite, det_points_csv, run_fr_eval, run_qa_suite
from .pipeline import Runtime, decode_image, verify_and_align
from .qa import ask_question
from .regions import build_table, region_masks, table_to_csv, table_to_json
from .saliency import explain_pair, export_raw, to_grayscale_png, to_overlay_png
from .verification import AlignedFace, Landmarks5, VerificationRecord

RECORD_FILE = "record.json"
CONTEXT_FILE = "context.txt"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_aligned(path: Path) -> AlignedFace:
    pixels = np.asarray(Image.open(path).convert("RGB"), dtype=np.uint8)
    identity = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return AlignedFace(pixels=pixels, landmarks=Landmarks5(CANONICAL_TEMPLATE), transform=identity)


def cmd_verify(args) -> int:
    config = load_config(args.config)
    if args.threshold is not None:
        config.threshold = args.threshold
        config.validate()
    runtime = Runtime.from_config(config)
    img_a = decode_image(Path(args.image_a).read_bytes(), "image_a")
    img_b = decode_image(Path(args.image_b).read_bytes(), "image_b")
    record, aligned_a, aligned_b = verify_and_align(img_a, img_b, runtime)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    Image.fromarray(aligned_a.pixels).save(out / "aligned_a.png")
    Image.fromarray(aligned_b.pixels).save(out / "aligned_b.png")
    payload = {
        "pair_id": record.pair_id,
        "score": record.score,
        "threshold": record.threshold,
        "decision": record.decision,
        "pic": record.pic,
    }
    _write_json(out / RECORD_FILE, payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_explain(args) -> int:
    config = load_config(args.config)
    runtime = Runtime.from_config(config)
    session_dir = Path(args.session_dir)
    record_data = json.loads((session_dir / RECORD_FILE).read_text())
    record = VerificationRecord(**record_data)
    probe = _load_aligned(session_dir / "aligned_a.png")
    reference = _load_aligned(session_dir / "aligned_b.png")

    maps = explain_pair(
        probe, reference, runtime.embedder, runtime.grid(), config.greedy_steps,
        probe_id=record.pair_id.split("::")[0], reference_id=record.pair_id.split("::")[-1],
    )
    table = build_table(maps, region_masks(probe.landmarks))
    info = GeneralContextInfo.from_record(
        record, system_name=config.system_name, model_description=config.model_description
    )
    context = build_context(record, table, info)

    (session_dir / "table.csv").write_text(table_to_csv(table))
    (session_dir / "table.json").write_text(table_to_json(table) + "\n")
    (session_dir / CONTEXT_FILE).write_text(context.text + "\n", encoding="utf-8")
    heat_dir = session_dir / "heatmaps"
    overlay_dir = session_dir / "overlays"
    raw_dir = session_dir / "raw"
    for d in (heat_dir, overlay_dir, raw_dir):
        d.mkdir(exist_ok=True)
    for smap in maps:
        to_grayscale_png(smap, heat_dir / f"{smap.method.code}.png")
        to_overlay_png(smap, probe.pixels, overlay_dir / f"{smap.method.code}.png")
        export_raw(smap, raw_dir / smap.method.code)
    print(f"explained {record.pair_id}: table, context, and 5 heatmaps in {session_dir}")
    return 0


def cmd_chat(args) -> int:
    config = load_config(args.config)
    runtime = Runtime.from_config(config)
    context_path = Path(args.session_dir) / CONTEXT_FILE
    context = QAContext.from_text(context_path.read_text(encoding="utf-8").strip())
    print("ask about the verification (empty line or 'exit' quits)")
    for line in sys.stdin:
        question = line.strip()
        if not question or question.lower() in ("exit", "quit"):
            break
        result = ask_question(
            question, context, runtime.qa, runtime.sentence_embedder,
            tau=config.tau, k=config.top_k,
        )
        marker = " [from sub-context]" if result.used_subcontext else ""
        print(f"> {result.answer} (confidence {result.confidence:.2f}){marker}")
    return 0


def cmd_calibrate(args) -> int:
    cal = load_calibration_csv(args.scores_csv)
    model = fit_pic(cal)
    model.save(args.out)
    print(f"wrote PIC model to {args.out} "
          f"(n_genuine={model.meta['n_genuine']}, n_impostor={model.meta['n_impostor']})")
    return 0


def cmd_eval_fr(args) -> int:
    targets = tuple(float(t) for t in args.fmr_targets.split(",")) if args.fmr_targets else (0.1, 0.01, 0.001)
    report = run_fr_eval(args.scores_csv, targets=targets)
    if args.out:
        _write_json(Path(args.out), report)
    if args.det_csv:
        Path(args.det_csv).write_text(det_points_csv(args.scores_csv))
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_eval_qa(args) -> int:
    config = load_config(args.config)
    runtime = Runtime.from_config(config)
    suite = QuestionSuite.load(args.suite)
    context_path = Path(args.session_dir) / CONTEXT_FILE
    context = QAContext.from_text(context_path.read_text(encoding="utf-8").strip())
    report = run_qa_suite(
        suite, [context], runtime.qa, runtime.sentence_embedder,
        tau=config.tau, k=config.top_k,
    )
    print(report.to_text())
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n")
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(load_config(args.config))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="facexplain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="compare two face images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--out", required=True, help="session directory to create")
    p.add_argument("--config")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("explain", help="add saliency maps, table, and context to a session dir")
    p.add_argument("session_dir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("chat", help="interactive QA over an explained session dir")
    p.add_argument("session_dir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("calibrate", help="fit a PIC model from a score CSV")
    p.add_argument("scores_csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("eval-fr", help="EER / FNMR-at-FMR report for a score CSV")
    p.add_argument("scores_csv")
    p.add_argument("--out")
    p.add_argument("--det-csv")
    p.add_argument("--fmr-targets", help="comma-separated FMR targets")
    p.set_defaults(func=cmd_eval_fr)

    p = sub.add_parser("eval-qa", help="run a question suite against a session dir")
    p.add_argument("suite")
    p.add_argument("session_dir")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval_qa)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FaceXplainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
