"""Entry point: `python -m simnet_llm_adapter [--mock script.json] [...]`."""

from __future__ import annotations

import argparse
import sys

from .adapter import Adapter, serve_stdio, serve_tcp
from .config import AdapterConfig
from .model import HttpChatModel, MockModel, ModelError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="simnet-llm-adapter")
    parser.add_argument("--mock", default=None,
                        help="JSON script file; serves scripted replies without network")
    parser.add_argument("--model", default=None, help="model id (default: $LLM_MODEL)")
    parser.add_argument("--context-budget", type=int, default=None,
                        help="client-side context window budget in tokens")
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--max-tokens", type=int, default=None)
    parser.add_argument("--listen", type=int, default=None,
                        help="serve TCP sessions on this port instead of stdio")
    args = parser.parse_args(argv)

    overrides = {
        "model": args.model,
        "context_budget_tokens": args.context_budget,
        "temperature": args.temperature,
        "max_tokens": args.max_tokens,
    }
    config = AdapterConfig.from_env(**{k: v for k, v in overrides.items() if v is not None})

    if args.mock:
        model = MockModel(args.mock)
    else:
        try:
            model = HttpChatModel(config)
        except ModelError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2

    adapter = Adapter(config, model)
    try:
        if args.listen:
            serve_tcp(adapter, args.listen)
        else:
            serve_stdio(adapter)
    finally:
        model.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
