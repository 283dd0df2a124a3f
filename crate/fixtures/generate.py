#!/usr/bin/env python3
"""Regenerates the synthetic fixture corpus. Output is deterministic."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent
rng = random.Random(20081)

SEEDS = [
    ("copd", ["chronic obstructive pulmonary disease"]),
    ("ckd", ["chronic kidney disease"]),
    ("dyspnea", ["shortness of breath", "breathlessness"]),
    ("spirometry", []),
    ("hemodialysis", ["dialysis"]),
    ("hypertension", ["high blood pressure"]),
    ("exacerbation", ["exacerbations"]),
    ("anemia", []),
    ("proteinuria", []),
    ("inhaled corticosteroids", []),
]

# {a} and {b} are filled with seed surface forms;
# the remaining words carry the recurring multi-word terms.
TEMPLATES = [
    "Patients with {a} showed reduced lung function after twelve months.",
    "Pulmonary rehabilitation improved {a} scores in the treated group.",
    "Home telemonitoring detected {a} earlier than routine visits.",
    "Serum creatinine rose steadily in subjects with {a}.",
    "Renal function declined faster when {a} was poorly controlled.",
    "Long term oxygen therapy was prescribed for severe {a}.",
    "Smoking cessation reduced the rate of {a} in the cohort.",
    "Quality of life correlated with {a} and {b}.",
    "Cardiovascular events were frequent among patients with {a} and {b}.",
    "The glomerular filtration rate fell in {a} with {b}.",
    "Blood pressure targets were rarely met in {a}.",
    "Lung function testing confirmed {a} in most participants.",
    "Mortality risk increased with {a} and with {b}.",
    "Home telemonitoring reduced hospital admissions for {a}.",
    "Pulmonary rehabilitation lowered readmission after {a}.",
    "Renal function and serum creatinine were recorded before {a}.",
]

FILLER = [
    "The study enrolled {n} adults from three outpatient clinics.",
    "Follow-up lasted {n} weeks.",
    "Data were collected by trained nurses.",
    "Dr. Rossi et al. reviewed the protocol, e.g. the exclusion list.",
    "A questionnaire was completed at baseline and at exit.",
    "Results were consistent across centres.",
    "Further trials are required.",
    "No adverse effects were reported in {n} visits.",
]

SURNAMES = ["Rossi", "Bianchi", "Verdi", "Esposito", "Romano", "Colombo", "Ricci", "Marino", "Greco", "Bruno",
            "Gallo", "Conti", "Costa", "Giordano", "Mancini"]
JOURNALS = ["Respiratory Medicine Letters", "Journal of Renal Care", "Clinical Telemonitoring",
            "Chest Practice", "Nephrology Reports"]
TITLE_HEADS = ["Outcomes of", "Monitoring", "Risk factors for", "Management of", "A cohort study of",
               "Early signs of", "Home care for"]


def surface(concept):
    label, syns = concept
    forms = [label] + syns
    return rng.choice(forms)


def abstract(i, main=None):
    n_sent = rng.choice([2, 3, 4, 5, 6, 8, 10, 14])
    sentences = []
    fillers = rng.sample(FILLER, len(FILLER))
    for k in range(n_sent):
        if k > 0 and fillers and rng.random() < 0.25:
            sentences.append(fillers.pop().format(n=rng.randint(12, 480)))
            continue
        a, b = rng.sample(SEEDS, 2)
        text = rng.choice(TEMPLATES).format(a=surface(a), b=surface(b))
        sentences.append(text[0].upper() + text[1:])
    main = main or rng.choice(SEEDS[:2])
    title = f"{rng.choice(TITLE_HEADS)} {main[0].upper()} in {rng.choice(['older adults', 'primary care', 'home care', 'clinic patients'])}"
    authors = ", ".join(f"{s} {rng.choice('ABCDEFGHLMP')}" for s in rng.sample(SURNAMES, rng.randint(1, 3)))
    header = [
        f"Title: {title}",
        f"Author: {authors}",
        f"Journal: {rng.choice(JOURNALS)}",
        f"Year: {rng.randint(2001, 2011)}",
        f"Volume: {rng.randint(1, 40)}",
        f"DOI: 10.5555/cscope.{i:04d}",
    ]
    return "\n".join(header) + "\n\n" + " ".join(sentences) + "\n"


def main():
    out = ROOT / "abstracts"
    out.mkdir(exist_ok=True)
    for i in range(1, 51):
        (out / f"abstract_{i:02d}.txt").write_text(abstract(i))

    (ROOT / "concepts.txt").write_text(
        "# label|synonym|...\n" + "".join("|".join([l] + s) + "\n" for l, s in SEEDS)
    )

    src = ROOT / "source"
    src.mkdir(exist_ok=True)
    for i in range(1, 9):
        open_access = i not in (3, 7)
        body = abstract(100 + i, main=SEEDS[0])
        head, text = body.split("\n\n", 1)
        meta = dict(line.split(": ", 1) for line in head.splitlines())
        ref = {
            "external_id": f"pmc{9000 + i}",
            "doi": meta["DOI"],
            "title": meta["Title"],
            "author": meta["Author"],
            "journal": meta["Journal"],
            "year": int(meta["Year"]),
            "volume": meta["Volume"],
            "open_access": open_access,
            "content": text if open_access else None,
        }
        (src / f"ref_{i:02d}.json").write_text(json.dumps(ref, indent=2) + "\n")

    bm = ROOT / "bm25"
    bm.mkdir(exist_ok=True)
    (bm / "d1.txt").write_text("Title: Treating COPD\nDOI: 10.5555/bm25.1\n\nCOPD copd treatment.\n")
    (bm / "d2.txt").write_text("Title: Kidney disease\nDOI: 10.5555/bm25.2\n\nKidney disease.\n")

    t3 = ROOT / "comparison"
    t3.mkdir(exist_ok=True)
    relevant = [f"r{k:04d}" for k in range(1, 501)]
    noise = [f"n{k:04d}" for k in range(1, 501)]
    (t3 / "judgments.txt").write_text(
        "# one query; every listed document is relevant\nG q1 500\n" + "".join(f"q1 {d}\n" for d in relevant)
    )

    def run(n_rel, n_total):
        docs = relevant[:n_rel] + noise[: n_total - n_rel]
        rng.shuffle(docs)
        return "".join(f"q1 {d} {r}\n" for r, d in enumerate(docs, 1))

    (t3 / "runs_a.txt").write_text(run(500, 880))
    (t3 / "runs_b.txt").write_text(run(375, 760))


if __name__ == "__main__":
    main()
