from openai import OpenAI


class ChatClient:
    def __init__(self, settings):
        llm = settings["llm"]
        self.model_name = llm["model_name"]
        self.temperature = llm["temperature"]
        self.max_tokens = llm["max_tokens"]
        self.client = OpenAI(api_key=llm["api_key"])

    def complete(self, system_prompt, user_message):
        response = self.client.chat.completions.create(
            model=self.model_name,
            temperature=self.temperature,
            max_tokens=self.max_tokens,
            messages=[{"role": "system", "content": system_prompt}, {"role": "user", "content": user_message}],
        )
        return response.choices[0].message.content
