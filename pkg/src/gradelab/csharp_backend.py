"""Subprocess language backend that shells out to a C# toolchain.

Configuration (JSON file or ToolchainConfig): the compiler command, optional
runner command (e.g. mono), extra compile flags, and the artifact suffix the
compiler produces. The compiler is invoked as

    <compiler> <flags...> <source.cs>

in a scratch directory; exit code 0 means success. Diagnostics are parsed
from the combined output with the standard C# shape

    <file>(<line>,<col>): error <CODE>: <message>

Reflection queries compile a small probe program appended to the student
source and parse one ``GRADELAB:<tag>:<json>`` line from its output. Probe
sources carry a ``// GRADELAB-QUERY ...`` marker comment so test doubles can
answer without a real toolchain. Sandboxing (namespaces, containers) is a
deployment concern: point `compiler`/`runner` at a wrapping script.

Limitations: submissions are single-file and must not define their own entry
point (the probe supplies Main).
"""

from __future__ import annotations

import json
import re
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .assignments import Literal
from .errors import BackendUnavailable, CompileTimeout, InvocationFault, MemberLookup
from .harness import CompileOutcome, Diagnostic

DIAGNOSTIC_RE = re.compile(
    r"^(?P<file>[^(\n]*)\((?P<line>\d+),(?P<col>\d+)\)\s*:\s*error\s+"
    r"(?P<code>[A-Z]+\d+)\s*:\s*(?P<message>.*)$",
    re.MULTILINE,
)

_CLR_TYPE_NAMES = {
    "int": "System.Int32",
    "double": "System.Double",
    "string": "System.String",
    "bool": "System.Boolean",
}


@dataclass(frozen=True)
class ToolchainConfig:
    compiler: str
    runner: str | None = None
    compile_flags: tuple[str, ...] = ()
    artifact_suffix: str = ".exe"

    @classmethod
    def from_file(cls, path: str | Path) -> "ToolchainConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            compiler=raw["compiler"],
            runner=raw.get("runner"),
            compile_flags=tuple(raw.get("compile_flags", [])),
            artifact_suffix=raw.get("artifact_suffix", ".exe"),
        )


def parse_diagnostics(output: str) -> tuple[Diagnostic, ...]:
    found = []
    for match in DIAGNOSTIC_RE.finditer(output):
        found.append(
            Diagnostic(
                line=int(match.group("line")),
                code=match.group("code"),
                message=match.group("message").strip(),
            )
        )
    return tuple(found)


def _csharp_literal(value: Literal) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        escaped = (
            value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\r", "\\r")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    return repr(value)


_PROBE_SHELL = """
// GRADELAB-QUERY {marker}
using System;
using System.Reflection;

public static class __GradelabProbe
{{
    public static void Main()
    {{
        try {{ Run(); }}
        catch (Exception e)
        {{
            Emit("exception", "{{\\"type\\": \\"" + E(e.GetType().Name)
                 + "\\", \\"message\\": \\"" + E(e.Message) + "\\"}}");
        }}
    }}

    static void Emit(string tag, string json)
    {{
        Console.WriteLine("GRADELAB:" + tag + ":" + json);
    }}

    static string E(string s)
    {{
        return s.Replace("\\\\", "\\\\\\\\").Replace("\\"", "\\\\\\"")
                .Replace("\\n", "\\\\n").Replace("\\r", "\\\\r").Replace("\\t", "\\\\t");
    }}

    static void EmitValue(object v)
    {{
        if (v == null) {{ Emit("value", "null"); return; }}
        if (v is bool) {{ Emit("value", ((bool)v) ? "true" : "false"); return; }}
        if (v is string) {{ Emit("value", "\\"" + E((string)v) + "\\""); return; }}
        if (v is double || v is float)
        {{
            Emit("value", Convert.ToDouble(v).ToString("R",
                 System.Globalization.CultureInfo.InvariantCulture));
            return;
        }}
        Emit("value", Convert.ToInt64(v).ToString(
             System.Globalization.CultureInfo.InvariantCulture));
    }}

    static string AccessOf(MemberInfo mem)
    {{
        var fi = mem as FieldInfo;
        if (fi != null) return fi.IsPublic ? "public" : fi.IsFamily ? "protected" : "private";
        var mi = mem as MethodInfo;
        if (mi != null) return mi.IsPublic ? "public" : mi.IsFamily ? "protected" : "private";
        var pi = mem as PropertyInfo;
        if (pi != null)
        {{
            var acc = pi.GetMethod != null ? pi.GetMethod : pi.SetMethod;
            return acc.IsPublic ? "public" : acc.IsFamily ? "protected" : "private";
        }}
        return null;
    }}

    const BindingFlags ALL = BindingFlags.Public | BindingFlags.NonPublic
                           | BindingFlags.Static | BindingFlags.Instance;

    static void Run()
    {{
{body}
    }}
}}
"""


def _probe_source(student_code: str, marker: str, body: str) -> str:
    return student_code + "\n" + _PROBE_SHELL.format(marker=marker, body=body)


class CSharpReflectionTarget:
    """Answers test-spec queries by compiling and running probe programs."""

    def __init__(
        self,
        config: ToolchainConfig,
        student_code: str,
        workdir: tempfile.TemporaryDirectory,
        query_timeout: float = 5.0,
    ):
        self._config = config
        self._code = student_code
        self._workdir = workdir
        self._timeout = query_timeout
        self._counter = 0

    def _run_probe(self, marker: str, body: str) -> tuple[str, object]:
        self._counter += 1
        stem = f"probe{self._counter}"
        directory = Path(self._workdir.name)
        source = directory / f"{stem}.cs"
        source.write_text(_probe_source(self._code, marker, body), encoding="utf-8")
        try:
            compile_proc = _run_tool(
                [self._config.compiler, *self._config.compile_flags, source.name],
                cwd=directory,
                timeout=self._timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise InvocationFault("TestTimeout", f"probe compile exceeded {self._timeout}s") from exc
        if compile_proc.returncode != 0:
            raise InvocationFault(
                "ProbeCompileError", _combined_output(compile_proc)[:500]
            )
        artifact = directory / f"{stem}{self._config.artifact_suffix}"
        command = [self._config.runner, artifact.name] if self._config.runner else [f"./{artifact.name}"]
        try:
            run_proc = _run_tool(command, cwd=directory, timeout=self._timeout)
        except subprocess.TimeoutExpired as exc:
            raise InvocationFault("TestTimeout", f"probe exceeded {self._timeout}s") from exc
        return _parse_probe_line(_combined_output(run_proc))

    def _query_bool(self, marker: str, body: str) -> bool:
        tag, data = self._run_probe(marker, body)
        if tag == "bool":
            return bool(data)
        raise InvocationFault("ProbeProtocolError", f"expected bool, got {tag}:{data!r}")

    def is_class_defined(self, name: str) -> bool:
        body = f'        Emit("bool", Type.GetType({_csharp_literal(name)}) != null ? "true" : "false");'
        return self._query_bool(f"is_class_defined {name}", body)

    def has_member(self, class_name: str, member_name: str, access: str | None = None) -> bool:
        check = "true" if access is None else f'access == {_csharp_literal(access)}'
        body = f"""        var t = Type.GetType({_csharp_literal(class_name)});
        if (t == null) {{ Emit("bool", "false"); return; }}
        bool ok = false;
        foreach (var mem in t.GetMember({_csharp_literal(member_name)}, ALL))
        {{
            string access = AccessOf(mem);
            if (access == null) continue;
            if ({check}) {{ ok = true; break; }}
        }}
        Emit("bool", ok ? "true" : "false");"""
        return self._query_bool(f"has_member {class_name}.{member_name}", body)

    def has_constructor(self, class_name: str, param_types: list[str]) -> bool:
        wanted = ", ".join(
            _csharp_literal(_CLR_TYPE_NAMES.get(t, t)) for t in param_types
        )
        body = f"""        var t = Type.GetType({_csharp_literal(class_name)});
        if (t == null) {{ Emit("bool", "false"); return; }}
        string[] want = new string[] {{ {wanted} }};
        bool ok = false;
        foreach (var c in t.GetConstructors(BindingFlags.Public | BindingFlags.NonPublic | BindingFlags.Instance))
        {{
            var ps = c.GetParameters();
            if (ps.Length != want.Length) continue;
            bool all = true;
            for (int i = 0; i < ps.Length; i++)
                if (ps[i].ParameterType.FullName != want[i]) {{ all = false; break; }}
            if (all) {{ ok = true; break; }}
        }}
        Emit("bool", ok ? "true" : "false");"""
        return self._query_bool(f"has_constructor {class_name}/{len(param_types)}", body)

    def invoke(self, class_name: str, method_name: str, args: list) -> Literal | None:
        rendered = ", ".join(_csharp_literal(a) for a in args)
        body = f"""        var t = Type.GetType({_csharp_literal(class_name)});
        if (t == null) {{ Emit("missing", "\\"class\\""); return; }}
        var m = t.GetMethod({_csharp_literal(method_name)}, ALL);
        if (m == null) {{ Emit("missing", "\\"method\\""); return; }}
        object inst = m.IsStatic ? null : Activator.CreateInstance(t);
        try
        {{
            var r = m.Invoke(inst, new object[] {{ {rendered} }});
            EmitValue(r);
        }}
        catch (TargetInvocationException e)
        {{
            var inner = e.InnerException != null ? e.InnerException : (Exception)e;
            Emit("exception", "{{\\"type\\": \\"" + E(inner.GetType().Name)
                 + "\\", \\"message\\": \\"" + E(inner.Message) + "\\"}}");
        }}"""
        tag, data = self._run_probe(f"invoke {class_name}.{method_name}", body)
        return self._interpret_value(tag, data, f"{class_name}.{method_name}")

    def eval_expression(self, expression: str) -> Literal | None:
        body = f"        EmitValue((object)({expression}));"
        try:
            tag, data = self._run_probe(f"eval_expression {expression}", body)
        except InvocationFault as fault:
            if fault.exception_type == "ProbeCompileError":
                raise InvocationFault(
                    "ExpressionSyntaxException", f"cannot compile {expression!r}"
                ) from fault
            raise
        return self._interpret_value(tag, data, expression)

    @staticmethod
    def _interpret_value(tag: str, data, context: str) -> Literal | None:
        if tag == "value":
            return data
        if tag == "missing":
            raise MemberLookup(f"{context}: {data}")
        if tag == "exception":
            raise InvocationFault(data.get("type", "Exception"), data.get("message", ""))
        raise InvocationFault("ProbeProtocolError", f"{context}: unexpected tag {tag!r}")


def _combined_output(proc: subprocess.CompletedProcess) -> str:
    return (proc.stdout or "") + (proc.stderr or "")


def _run_tool(command: list[str], cwd: Path, timeout: float) -> subprocess.CompletedProcess:
    try:
        return subprocess.run(
            command, cwd=cwd, capture_output=True, text=True, timeout=timeout
        )
    except FileNotFoundError as exc:
        raise BackendUnavailable(f"toolchain command not found: {command[0]}") from exc
    except PermissionError as exc:
        raise BackendUnavailable(f"toolchain command not executable: {command[0]}") from exc


def _parse_probe_line(output: str) -> tuple[str, object]:
    for line in reversed(output.strip().splitlines()):
        if line.startswith("GRADELAB:"):
            _, tag, payload = line.split(":", 2)
            try:
                return tag, json.loads(payload)
            except json.JSONDecodeError as exc:
                raise InvocationFault("ProbeProtocolError", f"bad payload {payload!r}") from exc
    raise InvocationFault("ProbeProtocolError", f"no GRADELAB line in {output[:200]!r}")


class CSharpBackend:
    """LanguageBackend over an external C# toolchain."""

    def __init__(self, config: ToolchainConfig, query_timeout: float = 5.0):
        self.config = config
        self.query_timeout = query_timeout

    def compile(self, code: str, timeout: float = 30.0) -> CompileOutcome:
        workdir = tempfile.TemporaryDirectory(prefix="gradelab-csharp-")
        directory = Path(workdir.name)
        source = directory / "submission.cs"
        source.write_text(code, encoding="utf-8")
        try:
            proc = _run_tool(
                [self.config.compiler, *self.config.compile_flags, source.name],
                cwd=directory,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise CompileTimeout(f"compile exceeded {timeout}s") from exc
        raw = _combined_output(proc)
        if proc.returncode != 0:
            diagnostics = parse_diagnostics(raw)
            if not diagnostics:
                diagnostics = (
                    Diagnostic(line=1, code="CS0000", message="compiler failed without parsable diagnostics"),
                )
            return CompileOutcome(status="failed", diagnostics=diagnostics, raw_output=raw)
        target = CSharpReflectionTarget(self.config, code, workdir, self.query_timeout)
        return CompileOutcome(status="ok", diagnostics=(), target=target, raw_output=raw)
