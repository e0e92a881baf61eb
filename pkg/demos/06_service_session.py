"""A scripted editing session over the wire protocol.

Starts the service on free ports, drives it exactly as the canvas client
would (newline-delimited JSON over TCP), then fetches the saved document
over HTTP.
"""
import json
import socket
import tempfile
import urllib.request

from skelforge.service import PROTOCOL_VERSION, serve

with tempfile.TemporaryDirectory() as data_dir:
    handle = serve(0, data_dir)
    sock = socket.create_connection(("127.0.0.1", handle.tcp_port))
    channel = sock.makefile("rw")

    def request(kind, **payload):
        msg = {"proto": PROTOCOL_VERSION, "id": request.n, "kind": kind, **payload}
        request.n += 1
        channel.write(json.dumps(msg) + "\n")
        channel.flush()
        return json.loads(channel.readline())
    request.n = 1

    r = request("CreatePart", polygon=[[0, 0], [400, 0], [400, 100], [0, 100]])
    print("torso:", r["status"], r["delta"]["counts"],
          f"{r['timing_us']['t_total'] / 1000:.1f} ms")

    r = request("CreatePart", polygon=[[150, 60], [190, 60], [190, 260], [150, 260]])
    print("limb:", r["status"], "hierarchy:",
          [(e["child"], e["parent"], e["attach"]["type"])
           for e in r["delta"]["hierarchy"]])

    r = request("SetConfig", config={"eps_c": 40.0})
    print("after raising the collapse threshold:", r["delta"]["counts"])

    r = request("SaveScene", name="session-demo")
    print("saved as:", r["delta"]["saved"])

    url = f"http://127.0.0.1:{handle.http_port}/scenes/session-demo"
    doc = json.loads(urllib.request.urlopen(url).read())
    print("fetched over http:", doc["version"], f"{len(doc['parts'])} parts")

    sock.close()
    handle.stop()
