#!/usr/bin/env python3
"""Writes data/mini_panda.json: an illustrative prenatal-testing decision model.

The conditional outcome distributions are derived from a small event process
(spontaneous loss, procedure-induced loss, test sensitivity/specificity and the
plan's actions).  The numbers are plausible round values, not clinical data.
"""
import itertools
import json
import pathlib

HISTORIES = [("TEEN", 0.15, 0.001), ("25YO", 0.40, 0.002),
             ("35YO", 0.30, 0.005), ("45YO", 0.15, 0.03)]

SPONT_LOSS = {False: 0.02, True: 0.20}
TESTS = {
    # name: (sensitivity, false-positive rate, procedure loss rate, invasive)
    "screen": (0.60, 0.05, 0.0, False),
    "cvs": (0.98, 0.01, 0.01, True),
    "amnio": (0.995, 0.0002, 0.005, True),
}
DEATH_BASE = 1e-5
DEATH_PER_PROCEDURE = 2e-5
DEATH_LATE_TAB = 1e-4

OUTCOMES = [
    ("healthy_no_invasive", "Healthy baby, no invasive testing",
     "having a healthy baby without any invasive prenatal test"),
    ("healthy_cvs_neg", "Healthy baby, reassured early by negative CVS",
     "having a healthy baby after a negative CVS early in pregnancy"),
    ("healthy_amnio_neg", "Healthy baby, reassured by negative amniocentesis",
     "having a healthy baby after a negative amniocentesis mid-pregnancy"),
    ("healthy_false_pos_continued", "Healthy baby after an unconfirmed positive result",
     "having a healthy baby after a positive test you chose not to act on"),
    ("ds_no_diagnosis", "Down's syndrome baby, no prenatal diagnosis",
     "having a baby with Down's syndrome without knowing beforehand"),
    ("ds_false_neg", "Down's syndrome baby after a falsely reassuring test",
     "having a baby with Down's syndrome after a test said the baby was unaffected"),
    ("ds_known_early", "Down's syndrome baby, diagnosed early, pregnancy continued",
     "having a baby with Down's syndrome, known since early pregnancy"),
    ("early_tab_affected", "Early termination of an affected pregnancy",
     "an early termination after CVS shows Down's syndrome"),
    ("early_tab_healthy", "Early termination of an unaffected pregnancy",
     "an early termination after a false-positive CVS"),
    ("late_tab_affected", "Late termination of an affected pregnancy",
     "a mid-pregnancy termination after amniocentesis shows Down's syndrome"),
    ("late_tab_healthy", "Late termination of an unaffected pregnancy",
     "a mid-pregnancy termination after a false-positive amniocentesis"),
    ("sab_cvs_healthy", "CVS-induced miscarriage, unaffected fetus",
     "a miscarriage caused by CVS of a healthy fetus"),
    ("sab_cvs_affected", "CVS-induced miscarriage, affected fetus",
     "a miscarriage caused by CVS of a fetus with Down's syndrome"),
    ("sab_amnio_healthy", "Amniocentesis-induced miscarriage, unaffected fetus",
     "a miscarriage caused by amniocentesis of a healthy fetus"),
    ("sab_amnio_affected", "Amniocentesis-induced miscarriage, affected fetus",
     "a miscarriage caused by amniocentesis of a fetus with Down's syndrome"),
    ("sab_spont", "Spontaneous miscarriage",
     "a spontaneous miscarriage unrelated to testing"),
    ("healthy_reference", "Healthy baby, known unaffected throughout (reference)",
     "having a healthy baby, knowing all along that the baby is unaffected, with no testing risk"),
    ("healthy_cvs_amnio_neg", "Healthy baby after negative CVS and amniocentesis",
     "having a healthy baby after both CVS and amniocentesis were negative"),
    ("healthy_cvs_overturned", "Healthy baby after a positive CVS overturned by amniocentesis",
     "having a healthy baby after a positive CVS was overturned by amniocentesis"),
    ("late_tab_affected_confirmed", "Late termination after CVS confirmed by amniocentesis",
     "a mid-pregnancy termination after CVS and amniocentesis both show Down's syndrome"),
    ("ds_known_late", "Down's syndrome baby, diagnosed mid-pregnancy, continued",
     "having a baby with Down's syndrome, known since mid-pregnancy"),
    ("maternal_death", "Death of the mother",
     "your own death"),
]
OUT = {name: i for i, (name, _, _) in enumerate(OUTCOMES)}

# A plan is (first test, action on positive, action on negative).  Actions are
# "T" terminate, "C" continue, "stop", or ("amnio"|"cvs", pos_action, neg_action)
# for a follow-up test.
PLANS = [
    ("none", None, None),
    ("amnio", "T", "stop"),
    ("amnio", "C", "stop"),
    ("cvs", "T", "stop"),
    ("cvs", "C", "stop"),
    ("cvs", ("amnio", "T", "C"), "stop"),
    ("cvs", ("amnio", "C", "C"), "stop"),
    ("cvs", "T", ("amnio", "T", "C")),
    ("cvs", "C", ("amnio", "C", "C")),
    ("cvs", ("amnio", "T", "C"), ("amnio", "T", "C")),
    ("cvs", ("amnio", "C", "C"), ("amnio", "C", "C")),
    ("cvs", "T", ("amnio", "C", "C")),
    ("cvs", ("amnio", "T", "C"), ("amnio", "C", "C")),
    ("cvs", "C", ("amnio", "T", "C")),
    ("cvs", ("amnio", "C", "C"), ("amnio", "T", "C")),
    ("screen", ("amnio", "T", "C"), "stop"),
    ("screen", ("amnio", "C", "C"), "stop"),
    ("screen", ("cvs", "T", "C"), "stop"),
]


def describe(plan):
    first, pos, neg = plan
    if first == "none":
        return "No prenatal testing."
    names = {"cvs": "CVS", "amnio": "amniocentesis", "screen": "serum screening"}

    def act(a):
        if a == "T":
            return "terminate the pregnancy"
        if a == "C" or a == "stop":
            return "continue the pregnancy"
        t, p, n = a
        return f"take {names[t]}; if positive, {act(p)}; otherwise {act(n)}"
    return (f"Take {names[first]}. If the result is positive, {act(pos)}. "
            f"If negative, {act(neg)}.").replace("otherwise continue the pregnancy; otherwise", "otherwise")


def label(plan):
    first, pos, neg = plan
    if first == "none":
        return "none"

    def tag(a):
        if isinstance(a, tuple):
            return f"{a[0]}({tag(a[1])}/{tag(a[2])})"
        return {"T": "T", "C": "C", "stop": "-"}[a]
    return f"{first}[+{tag(pos)} -{tag(neg)}]"


def run(plan, affected):
    """Returns {outcome: prob} for one fetus status, ignoring maternal death,
    plus expected procedure count and late-termination probability."""
    dist = {}
    procs = [0.0]
    late = [0.0]

    def add(name, p):
        dist[name] = dist.get(name, 0.0) + p

    def finish(p, history):
        # history: list of (test, result) performed; final action continue
        tests = [t for t, _ in history if TESTS[t][3]]
        pos = [t for t, r in history if r]
        if affected:
            if not tests:
                add("ds_no_diagnosis", p)
            elif not pos or all(not r for t, r in history if TESTS[t][3]):
                add("ds_false_neg", p)
            elif any(t == "cvs" and r for t, r in history):
                add("ds_known_early", p)
            else:
                add("ds_known_late", p)
        else:
            inv_pos = [t for t, r in history if r and TESTS[t][3]]
            if not tests:
                add("healthy_no_invasive", p)
            elif not inv_pos:
                if tests == ["cvs"]:
                    add("healthy_cvs_neg", p)
                elif tests == ["amnio"]:
                    add("healthy_amnio_neg", p)
                else:
                    add("healthy_cvs_amnio_neg", p)
            elif inv_pos == ["cvs"] and "amnio" in tests:
                add("healthy_cvs_overturned", p)
            else:
                add("healthy_false_pos_continued", p)

    def terminate(p, history):
        last = [t for t, r in history if r and TESTS[t][3]][-1]
        tests = [t for t, _ in history if TESTS[t][3]]
        if last == "cvs":
            add("early_tab_affected" if affected else "early_tab_healthy", p)
        else:
            late[0] += p
            if affected and "cvs" in tests:
                add("late_tab_affected_confirmed", p)
            else:
                add("late_tab_affected" if affected else "late_tab_healthy", p)

    def step(test, on_pos, on_neg, p, history):
        sens, fpr, loss, invasive = TESTS[test]
        if invasive:
            procs[0] += p
            add(f"sab_{test}_{'affected' if affected else 'healthy'}", p * loss)
            p *= 1.0 - loss
        ppos = sens if affected else fpr
        for result, q, a in ((True, ppos, on_pos), (False, 1.0 - ppos, on_neg)):
            hist = history + [(test, result)]
            if a == "T":
                terminate(p * q, hist)
            elif a in ("C", "stop"):
                finish(p * q, hist)
            else:
                step(a[0], a[1], a[2], p * q, hist)

    spont = SPONT_LOSS[affected]
    add("sab_spont", spont)
    first, pos, neg = plan
    if first == "none":
        finish(1.0 - spont, [])
    else:
        step(first, pos, neg, 1.0 - spont, [])
    return dist, procs[0], late[0]


def distribution(plan, risk):
    probs = [0.0] * len(OUTCOMES)
    exp_procs = 0.0
    late = 0.0
    for affected, w in ((False, 1.0 - risk), (True, risk)):
        dist, pr, lt = run(plan, affected)
        for name, p in dist.items():
            probs[OUT[name]] += w * p
        exp_procs += w * pr
        late += w * lt
    death = DEATH_BASE + DEATH_PER_PROCEDURE * exp_procs + DEATH_LATE_TAB * late
    probs = [p * (1.0 - death) for p in probs]
    probs[OUT["maternal_death"]] += death
    total = sum(probs)
    return [round(p / total, 12) for p in probs]


def fix_rounding(row):
    # make each row sum to 1 exactly in decimal by adjusting the largest entry
    i = max(range(len(row)), key=lambda j: row[j])
    row[i] = round(row[i] + (1.0 - sum(row)), 12)
    return row


def main():
    assert len(OUTCOMES) == 22 and len(PLANS) == 18
    model = {
        "name": "mini-panda (illustrative)",
        "outcomes": [{"id": i, "label": lab, "question_text": q}
                     for i, (_, lab, q) in enumerate(OUTCOMES)],
        "histories": [{"id": i, "label": lab, "prior": prior}
                      for i, (lab, prior, _) in enumerate(HISTORIES)],
        "strategies": [{"id": i, "label": label(p), "description": describe(p)}
                       for i, p in enumerate(PLANS)],
        "prob": [[fix_rounding(distribution(p, risk)) for (_, _, risk) in HISTORIES]
                 for p in PLANS],
        "best_anchor": OUT["healthy_reference"],
        "worst_anchor": OUT["maternal_death"],
    }
    out = pathlib.Path(__file__).resolve().parents[2] / "data" / "mini_panda.json"
    out.write_text(json.dumps(model, indent=1) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
