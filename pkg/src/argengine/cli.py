"""Command line entry point: `argengine solve|pipeline|eval`.

Machine-stable results go to stdout, diagnostics to stderr. Exit codes:
0 success, 1 data error (parse/backend failures), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import core, evaluation, formats, pipeline
from .llm import BackendConfig, ChatBackend, HttpBackend, load_mock_script

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2

SEMANTICS_CODES = {
    "GR": core.Semantics.GROUNDED,
    "CO": core.Semantics.COMPLETE,
    "PR": core.Semantics.PREFERRED,
    "ST": core.Semantics.STABLE,
}


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _format_extension(ext: core.Extension, af: core.ArgumentationFramework) -> str:
    names = sorted(ext.members, key=af.index_of)
    return "[" + ",".join(names) + "]"


def _load_framework(path: str, fmt: Optional[str]) -> core.ArgumentationFramework:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt is None:
        fmt = "tgf" if path.lower().endswith(".tgf") else "apx"
    if fmt == "apx":
        return formats.parse_apx(text)
    return formats.parse_tgf(text)


def _enumerate(af: core.ArgumentationFramework, semantics: core.Semantics):
    if semantics is core.Semantics.GROUNDED:
        return (core.grounded_extension(af),)
    if semantics is core.Semantics.COMPLETE:
        return core.complete_extensions(af)
    if semantics is core.Semantics.PREFERRED:
        return core.preferred_extensions(af)
    return core.stable_extensions(af)


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        af = _load_framework(args.file, args.format)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_DATA)
    except formats.ParseError as exc:
        for diag in exc.diagnostics:
            print(f"{args.file}:{diag}", file=sys.stderr)
        return EXIT_DATA
    semantics = SEMANTICS_CODES[args.semantics]

    if args.task in ("credulous", "skeptical"):
        if args.arg is None:
            return _fail("--arg NAME is required for decision tasks", EXIT_USAGE)
        try:
            af.index_of(args.arg)
        except core.UnknownArgumentError as exc:
            return _fail(str(exc), EXIT_DATA)
        extensions = _enumerate(af, semantics)
        if args.task == "credulous":
            hit = any(args.arg in ext.members for ext in extensions)
        else:
            hit = bool(extensions) and all(args.arg in ext.members for ext in extensions)
        print("YES" if hit else "NO")
        return EXIT_OK

    extensions = _enumerate(af, semantics)
    if args.task == "single":
        extensions = extensions[:1]
    for ext in extensions:
        print(_format_extension(ext, af))
    return EXIT_OK


def load_config_file(path: Optional[str]) -> Dict:
    if path is None:
        path = os.environ.get("ARGENGINE_CONFIG")
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _pipeline_config(data: Dict) -> pipeline.PipelineConfig:
    config = pipeline.PipelineConfig()
    section = data.get("pipeline", {})
    for key in (
        "generation_temperature", "conflict_temperature", "summary_temperature",
        "final_temperature", "max_tokens", "parallelism", "summary_word_cap",
        "preferred_fallback",
    ):
        if key in section:
            setattr(config, key, section[key])
    return config


def _backend_from_config(data: Dict) -> ChatBackend:
    section = data.get("backend", {})
    endpoint = section.get("endpoint")
    model = section.get("model")
    if not endpoint or not model:
        raise ValueError(
            "backend endpoint and model must be set in the config file (or use --mock)"
        )
    credential_env = section.get("credential_env")
    if credential_env and not os.environ.get(credential_env):
        raise ValueError(f"credential environment variable {credential_env} is not set")
    return HttpBackend(
        BackendConfig(
            endpoint=endpoint,
            model=model,
            credential_env=credential_env,
            timeout=float(section.get("timeout", 60.0)),
            max_retries=int(section.get("max_retries", 3)),
        ),
        log_path=section.get("log_path"),
    )


def cmd_pipeline(args: argparse.Namespace) -> int:
    if args.prompt is None and args.prompt_file is None:
        return _fail("provide a prompt or --prompt-file", EXIT_USAGE)
    if args.prompt_file is not None:
        with open(args.prompt_file, encoding="utf-8") as fh:
            prompt = fh.read().strip()
    else:
        prompt = args.prompt
    try:
        data = load_config_file(args.config)
        config = _pipeline_config(data)
        if args.mock:
            backend = load_mock_script(args.mock)
            config.parallelism = 1  # keep sequence-mode replay deterministic
        else:
            backend = _backend_from_config(data)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        answer, trace = pipeline.run(prompt, [], backend, config)
    except pipeline.PipelineError as exc:
        if args.trace:
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.write(exc.trace.to_json())
        return _fail(str(exc), EXIT_DATA)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace.to_json())
    print(answer)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    system_names = [s.strip() for s in args.systems.split(",") if s.strip()]
    valid = {s.value for s in evaluation.System}
    unknown = [s for s in system_names if s not in valid]
    if unknown:
        return _fail(f"unknown system name(s): {', '.join(unknown)}", EXIT_USAGE)
    try:
        questions = evaluation.load_questions(args.questions)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_DATA)
    except evaluation.QuestionFileError as exc:
        for problem in exc.problems:
            print(f"{args.questions}: {problem}", file=sys.stderr)
        return EXIT_DATA
    try:
        data = load_config_file(args.config)
        pipe_config = _pipeline_config(data)
        if args.mock_answers and args.mock_judge:
            answer_backend: ChatBackend = load_mock_script(args.mock_answers)
            judge_backend: ChatBackend = load_mock_script(args.mock_judge)
            pipe_config.parallelism = 1
        else:
            answer_backend = judge_backend = _backend_from_config(data)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)

    systems: Dict[str, evaluation.AnswerFn] = {}
    for name in system_names:
        if name == evaluation.System.BASELINE.value:
            systems[name] = evaluation.baseline_system(answer_backend)
        else:
            systems[name] = evaluation.pipeline_system(answer_backend, pipe_config)

    eval_section = data.get("eval", {})
    eval_config = evaluation.EvalConfig(
        n_samples=int(eval_section.get("n_samples", 5)),
        sample_cap=int(eval_section.get("sample_cap", 7)),
        judge_temperature=float(eval_section.get("judge_temperature", 0.7)),
    )
    _records, table = evaluation.run_eval(
        questions, systems, judge_backend, eval_config, args.out
    )
    print(table.render_text(), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="argengine",
        description="Argumentation solver, LLM pipeline, and eval harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an argumentation framework file")
    solve.add_argument("file")
    solve.add_argument("--format", choices=["apx", "tgf"], default=None,
                       help="input format (default: by file extension)")
    solve.add_argument("--semantics", choices=sorted(SEMANTICS_CODES), default="GR")
    solve.add_argument(
        "--task", choices=["single", "enumerate", "credulous", "skeptical"],
        default="enumerate",
    )
    solve.add_argument("--arg", default=None, help="argument name for decision tasks")
    solve.set_defaults(func=cmd_solve)

    pipe = sub.add_parser("pipeline", help="run the argument-informed answer pipeline")
    pipe.add_argument("prompt", nargs="?", default=None)
    pipe.add_argument("--prompt-file", default=None)
    pipe.add_argument("--config", default=None, help="TOML config file")
    pipe.add_argument("--trace", default=None, help="write the run trace JSON here")
    pipe.add_argument("--mock", default=None, help="scripted mock backend JSON file")
    pipe.set_defaults(func=cmd_pipeline)

    ev = sub.add_parser("eval", help="run the benchmark eval harness")
    ev.add_argument("questions", help="JSON-lines question file")
    ev.add_argument("--config", default=None)
    ev.add_argument("--systems", default="baseline,pipeline")
    ev.add_argument("--out", default=None, help="output directory (enables resume)")
    ev.add_argument("--mock-answers", default=None)
    ev.add_argument("--mock-judge", default=None)
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
