#!/usr/bin/env python3
# Copyright 2026 The sketchy Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the bundled reference backbone specs under data/specs/."""
import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "specs")


def conv(out, k=3, s=1, p=None, bias=False, **kw):
    d = {"kind": "conv", "kernel": k, "stride": s, "padding": k // 2 if p is None else p,
         "out": out, "bias": bias}
    d.update(kw)
    return d


def dw(k=3, s=1):
    return {"kind": "depthwise-conv", "kernel": k, "stride": s, "padding": k // 2, "bias": False}


ACT = {"kind": "activation"}
NORM = {"kind": "norm"}
GAP = {"kind": "pooling", "global": True}


def vgg16():
    layers = []
    for v in [64, 64, "M", 128, 128, "M", 256, 256, 256, "M", 512, 512, 512, "M", 512, 512, 512, "M"]:
        if v == "M":
            layers.append({"kind": "pooling", "kernel": 2, "stride": 2, "padding": 0})
        else:
            layers += [conv(v, bias=True), ACT]
    layers.append(GAP)
    return {"name": "vgg16", "role": "reference", "input_channels": 3, "layers": layers}


def resnet18():
    layers = [conv(64, k=7, s=2, p=3), NORM, ACT,
              {"kind": "pooling", "kernel": 3, "stride": 2, "padding": 1}]
    cin = 64
    for cout, s in [(64, 1), (64, 1), (128, 2), (128, 1), (256, 2), (256, 1), (512, 2), (512, 1)]:
        layers += [conv(cout, s=s, fork=True), NORM, ACT, conv(cout), NORM]
        if s != 1 or cin != cout:
            layers += [conv(cout, k=1, s=s, p=0, branch=True), dict(NORM, branch=True)]
        layers.append(ACT)
        cin = cout
    layers.append(GAP)
    return {"name": "resnet18", "role": "reference", "input_channels": 3, "layers": layers}


def mobilenetv2():
    layers = [conv(32, s=2), NORM, ACT]
    cin = 32
    for t, c, n, s in [(1, 16, 1, 1), (6, 24, 2, 2), (6, 32, 3, 2), (6, 64, 4, 2),
                       (6, 96, 3, 1), (6, 160, 3, 2), (6, 320, 1, 1)]:
        for i in range(n):
            stride = s if i == 0 else 1
            if t != 1:
                layers += [conv(cin * t, k=1, p=0), NORM, ACT]
            layers += [dw(s=stride), NORM, ACT, conv(c, k=1, p=0), NORM]
            cin = c
    layers += [conv(1280, k=1, p=0), NORM, ACT, GAP]
    return {"name": "mobilenetv2", "role": "reference", "input_channels": 3, "layers": layers}


def selector():
    return {"name": "canvas-selector", "role": "selector", "input_channels": 5,
            "layers": [{"kind": "recurrent-gated", "in": 5, "hidden": 128, "steps": 100},
                       {"kind": "linear", "in": 128, "out": 4, "bias": True}]}


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    for fn in (vgg16, resnet18, mobilenetv2, selector):
        spec = fn()
        with open(os.path.join(OUT, spec["name"] + ".json"), "w") as f:
            json.dump(spec, f, indent=1)
            f.write("\n")
