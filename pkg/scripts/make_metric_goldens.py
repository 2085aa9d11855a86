"""Regenerate tests/data/metric_golden.json with the sacrebleu package.

sacrebleu is not a dependency of devcorpus; install it separately before
running this script. Its output is the independent reference the test
suite compares against.

    python scripts/make_metric_goldens.py
"""
from __future__ import annotations

import json
from pathlib import Path

from sacrebleu.metrics import BLEU, CHRF

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main() -> None:
    hyps = (DATA / "metric_hyp.txt").read_text(encoding="utf-8").splitlines()
    refs = (DATA / "metric_ref.txt").read_text(encoding="utf-8").splitlines()
    assert len(hyps) == len(refs) == 20

    bleu = BLEU(tokenize="none", smooth_method="exp")
    bleu_none = BLEU(tokenize="none", smooth_method="none")
    chrf = CHRF(char_order=6, word_order=0, beta=2)
    chrfpp = CHRF(char_order=6, word_order=2, beta=2)

    def seg_avg(metric):
        scores = [metric.sentence_score(h, [r]).score for h, r in zip(hyps, refs)]
        return sum(scores) / len(scores)

    # no 4-gram matches, so the smoothing branch is exercised
    sparse_h = ["राम घर गयो र खाना खायो।", "आज पानी परेन।"]
    sparse_r = ["राम घर गयो अनि खाना खायो।", "हिजो पानी परेन।"]

    out = {
        "reference_tool": "sacrebleu",
        "sacrebleu_version": __import__("sacrebleu").__version__,
        "bleu_exp": bleu.corpus_score(hyps, [refs]).score,
        "bleu_none": bleu_none.corpus_score(hyps, [refs]).score,
        "sparse_hyp": sparse_h,
        "sparse_ref": sparse_r,
        "bleu_exp_sparse": bleu.corpus_score(sparse_h, [sparse_r]).score,
        "bleu_none_sparse": bleu_none.corpus_score(sparse_h, [sparse_r]).score,
        "chrf": chrf.corpus_score(hyps, [refs]).score,
        "chrfpp": chrfpp.corpus_score(hyps, [refs]).score,
        "chrf_segment_avg": seg_avg(chrf),
        "chrfpp_segment_avg": seg_avg(chrfpp),
        "signatures": {
            "bleu": str(bleu.get_signature()),
            "chrf": str(chrf.get_signature()),
            "chrfpp": str(chrfpp.get_signature()),
        },
    }
    path = DATA / "metric_golden.json"
    path.write_text(json.dumps(out, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(json.dumps(out, indent=2, ensure_ascii=False))


if __name__ == "__main__":
    main()
