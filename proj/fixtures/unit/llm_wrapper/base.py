class BaseLlm:
    def achat(self, history, callback):
        raise NotImplementedError
