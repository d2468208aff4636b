"""Scripted JSON-lines scorer used by the transport tests.

Scores a text as -1 per whitespace-separated word. The first argument picks
a behaviour: normal, reverse, garbage, positive, reject:<word>, hang,
crash-once:<marker path>, die.
"""
import json
import os
import select
import sys

mode = sys.argv[1] if len(sys.argv) > 1 else "normal"

if mode.startswith("crash-once:"):
    marker = mode.split(":", 1)[1]
    if not os.path.exists(marker):
        open(marker, "w").close()
        sys.stderr.write("model failed to load\n")
        sys.exit(3)
    mode = "normal"

if mode == "die":
    sys.stderr.write("CUDA out of memory\n")
    sys.exit(1)


def reply(req):
    words = len(req["text"].split())
    if mode == "garbage":
        return "this is not json"
    if mode.startswith("reject:") and mode.split(":", 1)[1] in req["text"]:
        return json.dumps({"id": req["id"], "error": "text too long"})
    total = float(words) if mode == "positive" else -float(words)
    return json.dumps({"id": req["id"], "logprob_sum": total, "num_tokens": words})


buf = b""
while True:
    chunk = os.read(0, 65536)
    if not chunk:
        break
    buf += chunk
    # Drain whatever else is already queued so a batch is answered together.
    while select.select([0], [], [], 0.05)[0]:
        more = os.read(0, 65536)
        if not more:
            break
        buf += more
    *lines, buf = buf.split(b"\n")
    reqs = [json.loads(l) for l in lines if l.strip()]
    if mode == "hang":
        continue
    if mode == "reverse":
        reqs.reverse()
    out = "".join(reply(r) + "\n" for r in reqs)
    sys.stdout.write(out)
    sys.stdout.flush()
