import inspect

TOOLS = {}


def register_tool(fn):
    """Expose a function to the model as a callable tool."""
    params = inspect.signature(fn).parameters
    TOOLS[fn.__name__] = {
        "type": "function",
        "function": {
            "name": fn.__name__,
            "description": (fn.__doc__ or "").strip(),
            "parameters": {
                "type": "object",
                "properties": {name: {"type": "string"} for name in params},
                "required": list(params),
            },
        },
        "callable": fn,
    }
    return fn


def tool_schemas():
    return [{"type": spec["type"], "function": spec["function"]} for spec in TOOLS.values()]


def run_tool_call(call):
    spec = TOOLS[call.function.name]
    result = spec["callable"](**call.function.arguments)
    return {"role": "tool", "tool_call_id": call.id, "content": str(result)}
