#!/usr/bin/env python3
"""Writes the bundled two-package fixture corpus.

fixtures/messages.jsonl  canonical-jsonl dump (django, selenium, plus some
                         flask posts that the package filter drops)
fixtures/releases.csv    package,version,ts release history

Output is a pure function of --seed.
"""

import argparse
import datetime as dt
import json
import pathlib
import random

TOPICS = {
    "orm": "model queryset database migration field foreignkey query filter join index postgres sqlite table "
           "column transaction manager related select prefetch annotate aggregate",
    "templates": "template render context view block extends tag filter static html css include variable loop "
                 "inheritance layout jinja",
    "forms": "form field validation widget clean input submit post request csrf error message choice modelform "
             "initial label",
    "auth": "user login password session permission group token authentication logout admin account register "
            "middleware decorator",
    "deploy": "server deploy nginx gunicorn docker settings environment static production debug wsgi port "
              "container heroku logging",
    "webdriver": "driver element click find xpath selector wait timeout page browser chrome firefox locator "
                 "window frame iframe",
    "testing": "test case assert fixture unittest pytest suite runner mock setup teardown coverage fail pass "
               "report headless",
    "grid": "grid node hub remote capability session parallel docker browser version port server instance "
            "cloud screenshot",
}

PACKAGE_TOPICS = {
    "django": {"orm": 4, "templates": 3, "forms": 3, "auth": 2, "deploy": 2, "testing": 1},
    "selenium": {"webdriver": 5, "testing": 3, "grid": 2, "deploy": 1},
    "flask": {"templates": 2, "deploy": 3, "auth": 1},
}

GENERIC = ("how can get work using use trying want need way code problem example question following "
           "something working file does without able seems output function value list").split()
POSITIVE = "great thanks good helpful works nice love perfect easy excellent happy clean".split()
NEGATIVE = "error fail broken wrong bad crash problem issue annoying confusing slow ugly".split()
RELEASE = ("upgrade upgraded release released version changelog deprecated deprecation removed breaking "
           "compatibility new feature update updated notes").split()

RELEASES = [
    ("django", "2.0.0", "2018-12-03"),
    ("django", "2.1.0", "2019-02-18"),
    ("django", "2.1.1", "2019-04-01"),
    ("django", "2.2.0", "2019-06-10"),
    ("django", "3.0.0", "2019-10-07"),
    ("django", "3.1.0", "2020-01-20"),
    ("django", "3.1.1", "2020-03-23"),
    ("selenium", "3.0.0", "2018-12-10"),
    ("selenium", "3.1.0", "2019-03-11"),
    ("selenium", "3.2.0", "2019-07-22"),
    ("selenium", "3.3.0", "2019-11-25"),
    ("selenium", "3.3.1", "2020-02-17"),
    ("selenium", "4.0.0", "2020-05-04"),
    ("selenium", "4.1.0", "2020-06-22"),
]

START = dt.datetime(2019, 1, 1, tzinfo=dt.timezone.utc)
END = dt.datetime(2020, 9, 30, tzinfo=dt.timezone.utc)


def weighted(rng, table):
    keys = sorted(table)
    return rng.choices(keys, weights=[table[k] for k in keys])[0]


def body(rng, package, mention_in_body, release_related):
    words = []
    topic = weighted(rng, PACKAGE_TOPICS[package])
    second = weighted(rng, PACKAGE_TOPICS[package])
    vocab = TOPICS[topic].split()
    vocab2 = TOPICS[second].split()
    for _ in range(rng.randint(18, 40)):
        r = rng.random()
        if r < 0.45:
            words.append(rng.choice(vocab))
        elif r < 0.6:
            words.append(rng.choice(vocab2))
        elif r < 0.9:
            words.append(rng.choice(GENERIC))
        elif r < 0.95:
            words.append(rng.choice(POSITIVE))
        else:
            words.append(rng.choice(NEGATIVE))
    if release_related:
        for _ in range(rng.randint(4, 8)):
            words.insert(rng.randrange(len(words) + 1), rng.choice(RELEASE))
        for _ in range(rng.randint(1, 3)):
            words.insert(rng.randrange(len(words) + 1), rng.choice(NEGATIVE))
    if mention_in_body:
        words.insert(rng.randrange(len(words) + 1), package.capitalize())
    text = " ".join(words)
    code = ""
    if rng.random() < 0.3:
        code = "<pre><code>import %s\n%s.%s()</code></pre>" % (package, rng.choice(vocab), rng.choice(vocab))
    return "<p>%s.</p>%s" % (text[0].upper() + text[1:], code)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "fixtures"))
    ap.add_argument("--seed", type=int, default=20190101)
    ap.add_argument("--messages", type=int, default=2000)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    release_days = {}
    for package, _, day in RELEASES:
        d = dt.datetime.strptime(day, "%Y-%m-%d").replace(tzinfo=dt.timezone.utc)
        release_days.setdefault(package, []).append(d)

    span = (END - START).total_seconds()
    rows = []
    for i in range(args.messages):
        ts = START + dt.timedelta(seconds=int(rng.random() * span))
        r = rng.random()
        package = "django" if r < 0.52 else ("selenium" if r < 0.92 else "flask")
        after_release = any(0 <= (ts - d).total_seconds() < 7 * 86400 for d in release_days.get(package, []))
        release_related = after_release and rng.random() < 0.45
        in_body = rng.random() < 0.25
        tags = ["python"]
        if not in_body or rng.random() < 0.5:
            tags.append(package)
        if package == "selenium" and rng.random() < 0.3:
            tags.append("webdriver")
        rows.append({
            "id": "m%05d" % i,
            "ts": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "body": body(rng, package, in_body, release_related),
            "tags": tags,
        })
    rows.sort(key=lambda row: (row["ts"], row["id"]))
    with open(out / "messages.jsonl", "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "releases.csv", "w", encoding="utf-8") as f:
        f.write("package,version,ts\n")
        for package, version, day in RELEASES:
            f.write("%s,%s,%sT12:00:00Z\n" % (package, version, day))


if __name__ == "__main__":
    main()
