from chatbot.bot import ChatBot


def main():
    bot = ChatBot()
    while True:
        try:
            line = input("> ")
        except EOFError:
            break
        print(bot.reply(line))


if __name__ == "__main__":
    main()
