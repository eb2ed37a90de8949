"""Drive the HTTP API end to end against a live server.

Starts `statquery serve` on a free port, uploads the flight fixture,
runs queries, fetches charts and HOPs, and shuts the server down.
Run from the repository root:  python3 demos/06_http_api.py
"""

import socket
import subprocess
import sys
import tempfile
import time

import requests

with socket.socket() as sock:
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]

data_dir = tempfile.mkdtemp(prefix="statquery-demo-")
server = subprocess.Popen(
    [
        sys.executable, "-m", "statquery.cli", "serve",
        "--listen", f"127.0.0.1:{port}",
        "--data-dir", data_dir,
        "--synonyms", "fixtures/flight_synonyms.json",
        "--offline",
    ],
    stdout=subprocess.DEVNULL,
    stderr=subprocess.STDOUT,
)
base = f"http://127.0.0.1:{port}"

try:
    for _ in range(100):
        try:
            session_id = requests.post(f"{base}/sessions", timeout=2).json()["session_id"]
            break
        except requests.RequestException:
            time.sleep(0.2)
    else:
        raise SystemExit("server never came up")
    print(f"server on {base}, session {session_id[:8]}...")

    upload = requests.post(
        f"{base}/sessions/{session_id}/dataset",
        params={"name": "flights.csv"},
        data=open("fixtures/flights.csv", "rb").read(),
    ).json()
    print(f"uploaded dataset: {upload['dataset']['n_rows']} rows, "
          f"{len(upload['dataset']['columns'])} columns")

    for text in [
        "Longer flight results in a more expensive ticket",
        "Include class as an additional variable.",
    ]:
        body = requests.post(
            f"{base}/sessions/{session_id}/query", json={"text": text}
        ).json()
        print(f"\nquery: {text}")
        print(f"  -> {body['response']['text']}")

    model = requests.get(f"{base}/sessions/{session_id}/model").json()["model"]
    print(f"\nactive model: {model['formula']} (AIC {model['aic']:.1f})")

    charts = requests.get(
        f"{base}/sessions/{session_id}/charts",
        params={"vars": "duration,price"},
    ).json()["payload"]
    print(f"scatter payload with {len(charts['points'])} row-indexed points")

    views = requests.get(f"{base}/sessions/{session_id}/model/views").json()["views"]
    print(f"model views: {len(views['residuals_vs_fitted'])} residual points, "
          f"skew flag {views['diagnostics']['skew_flag']}")

    hops = requests.get(
        f"{base}/sessions/{session_id}/hops", params={"draws": 50, "seed": 99}
    ).json()
    print(f"hops: {hops['hops']['n_draws']} draws (seed {hops['hops']['seed']}), "
          f"{len(hops['curves']['curves'])} curves")

    transcript = requests.get(f"{base}/sessions/{session_id}/transcript").json()
    print(f"transcript so far: {len(transcript['transcript'])} entries")
finally:
    server.terminate()
    server.wait(timeout=10)
    print("\nserver stopped")
