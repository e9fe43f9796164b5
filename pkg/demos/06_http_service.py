"""
HTTP service walkthrough
========================

Exercise the API in-process: upload a pair, fetch a heatmap, ask a
question, and read the session summary.  `facexplain serve` runs the same
app as a real server.
"""

import io

from fastapi.testclient import TestClient
from PIL import Image

from facexplain.config import ServiceConfig
from facexplain.sampledata import fixture_pair
from facexplain.service import create_app


def as_png(face):
    buf = io.BytesIO()
    Image.fromarray(face.pixels).save(buf, format="PNG")
    return buf.getvalue()


img_a, img_b = fixture_pair()
app = create_app(ServiceConfig())
with TestClient(app) as client:
    resp = client.post(
        "/v1/verify",
        files={
            "image_a": ("a.png", as_png(img_a), "image/png"),
            "image_b": ("b.png", as_png(img_b), "image/png"),
        },
    )
    body = resp.json()
    sid = body["session_id"]
    print(f"POST /v1/verify -> {resp.status_code}")
    print(f"  decision {body['decision']}  score {body['score']:.3f}  "
          f"confidence {body['confidence']:.1%}")
    print(f"  heatmaps: {', '.join(sorted(body['heatmap_urls']))}")

    png = client.get(body["heatmap_urls"]["AVG"])
    print(f"GET {body['heatmap_urls']['AVG']} -> {png.status_code} "
          f"({len(png.content)} bytes of {png.headers['content-type']})")

    ask = client.post(
        f"/v1/sessions/{sid}/ask",
        json={"question": "How sure are you about the decision?"},
    )
    print(f"POST /v1/sessions/{{id}}/ask -> {ask.status_code}")
    print(f"  answer: {ask.json()['answer']}")

    summary = client.get(f"/v1/sessions/{sid}")
    print(f"GET /v1/sessions/{{id}} -> {summary.status_code}, "
          f"{len(summary.json()['turns'])} turn(s) recorded")
